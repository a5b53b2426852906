//! Softmax policy over masked logits and action selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{ops, Tape, Tensor};

/// How the next action is chosen from the policy distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    /// Argmax of the probabilities; exact ties break to the lowest index.
    Greedy,
    /// Draw from the distribution.
    Sample,
    /// Take a predetermined action (used to replay a trajectory, e.g. for
    /// gradient checks against a frozen action sequence).
    Forced(usize),
}

/// One decoding step: logits, the policy distribution, the chosen index,
/// and its log-probability (tracked on the tape when the logits are).
pub struct PolicyStep {
    pub logits: Tensor,
    pub probs: Tensor,
    pub chosen: usize,
    pub log_prob: Tensor,
}

/// Applies the masked softmax and picks an action. The chosen index always
/// has positive probability, so `log_prob` is finite.
pub fn policy_select<R: Rng>(
    tape: &mut Tape,
    logits: &Tensor,
    mask: &[bool],
    mode: SelectMode,
    rng: &mut R,
) -> Result<PolicyStep> {
    let probs = ops::masked_softmax(tape, logits, mask)?;
    let p = probs.data();
    let chosen = match mode {
        SelectMode::Greedy => {
            let mut best = None;
            for (i, &pi) in p.iter().enumerate() {
                if mask[i] {
                    continue;
                }
                match best {
                    Some((_, bp)) if pi <= bp => {}
                    _ => best = Some((i, pi)),
                }
            }
            best.expect("masked_softmax guarantees an unmasked index").0
        }
        SelectMode::Sample => {
            let r: f64 = rng.random();
            let mut cum = 0.0;
            let mut picked = None;
            for (i, &pi) in p.iter().enumerate() {
                if pi <= 0.0 {
                    continue;
                }
                cum += pi;
                if r < cum {
                    picked = Some(i);
                    break;
                }
            }
            // Rounding can leave cum slightly below 1; fall back to the
            // last index with positive mass.
            picked.unwrap_or_else(|| {
                p.iter()
                    .rposition(|&pi| pi > 0.0)
                    .expect("masked_softmax guarantees positive mass")
            })
        }
        SelectMode::Forced(i) => {
            if i >= p.len() || mask[i] {
                return Err(Error::IndexOutOfRange(format!(
                    "forced action {i} is masked or out of range"
                )));
            }
            i
        }
    };
    let chosen_prob = ops::select(tape, &probs, chosen, 0)?;
    let log_prob = ops::ln(tape, &chosen_prob)?;
    Ok(PolicyStep {
        logits: logits.clone(),
        probs,
        chosen,
        log_prob,
    })
}
