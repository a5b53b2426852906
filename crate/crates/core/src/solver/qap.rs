//! Two-stage QAP decoding.
//!
//! Stage 1 embeds the n^2 block representatives (one per candidate
//! factory/location pair) and selects a block, fixing the first assignment.
//! Stage 2 walks the remaining factories in cyclic order; for each it embeds
//! a per-location feature vector derived from the distance-flow product
//! entries and picks an unused location through the pointer policy. The
//! default feature is the exact cost increment the candidate assignment
//! would add against everything placed so far.

use std::time::Instant;

use rand::Rng;

use crate::dfp::{placement_increment, BlockId, DfpView};
use crate::error::{Error, Result};
use crate::gpn::{graph_embed, pointer_logits, policy_select, SelectMode};
use crate::instance::QapInstance;
use crate::tensor::{ops, Tape, Tensor};

use super::{
    evaluate_qap_cost, min_max_normalize, DecodeMode, ReplayCursor, Solution, Stage2Features,
    TwoStageGpn,
};

/// Decodes an assignment without gradient tracking.
pub fn solve_qap<R: Rng>(
    model: &TwoStageGpn,
    q: &QapInstance,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<Solution> {
    let mut tape = Tape::new();
    let (solution, _) = solve_qap_traced(model, &mut tape, q, mode, rng)?;
    Ok(solution)
}

/// Decodes an assignment on an explicit tape; the second return value is the
/// trajectory log-probability (stage 1 plus every stage-2 step).
pub fn solve_qap_traced<R: Rng>(
    model: &TwoStageGpn,
    tape: &mut Tape,
    q: &QapInstance,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<(Solution, Tensor)> {
    let n = q.n;
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "qap decode needs n >= 2, got {n}"
        )));
    }
    // One block choice plus n - 1 location choices.
    let mut replay = match &mode {
        DecodeMode::Replay(actions) => Some(ReplayCursor::new(actions, n)?),
        _ => None,
    };
    let next_select = |mode: &DecodeMode, replay: &mut Option<ReplayCursor>| match mode {
        DecodeMode::Greedy => SelectMode::Greedy,
        DecodeMode::Sample => SelectMode::Sample,
        DecodeMode::Replay(_) => {
            SelectMode::Forced(replay.as_mut().expect("replay cursor exists").next())
        }
    };

    let started = Instant::now();
    let view = DfpView::new(q);

    // Stage 1: pick Block(a*, b*) from the normalized representatives,
    // laid out in (factory, location) lexicographic order.
    let reps = view.representatives();
    let features = Tensor::column(min_max_normalize(&reps));
    let refs = graph_embed(tape, &model.block_model.encoder, &features)?;
    let mask = vec![false; n * n];
    let logits = pointer_logits(tape, &model.block_model.decoder, &refs, None, &mask)?;
    let stage1 = policy_select(tape, &logits, &mask, next_select(&mode, &mut replay), rng)?;
    let factory = stage1.chosen / n;
    let location = stage1.chosen % n;

    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut placed = vec![(factory, location)];
    perm[factory] = location;
    used[location] = true;
    let mut log_prob_sum = stage1.log_prob;

    // Stage 2: remaining factories in cyclic order after the anchored one.
    let block = view.block(BlockId { factory, location })?;
    for offset in 1..n {
        let k = (factory + offset) % n;
        let raw: Vec<f64> = match model.stage2 {
            Stage2Features::CostIncrement => (0..n)
                .map(|l| placement_increment(q, &placed, k, l))
                .collect(),
            Stage2Features::BlockColumn => (0..n).map(|l| block.get(l, k)).collect(),
        };
        let features = Tensor::column(min_max_normalize(&raw));
        let refs = graph_embed(tape, &model.inblock_model.encoder, &features)?;
        let logits = pointer_logits(tape, &model.inblock_model.decoder, &refs, None, &used)?;
        let step = policy_select(tape, &logits, &used, next_select(&mode, &mut replay), rng)?;
        perm[k] = step.chosen;
        used[step.chosen] = true;
        placed.push((k, step.chosen));
        log_prob_sum = ops::add(tape, &log_prob_sum, &step.log_prob)?;
    }

    let cost = evaluate_qap_cost(q, &perm)?;
    Ok((
        Solution {
            perm,
            cost,
            log_prob_sum: log_prob_sum.item(),
            elapsed: started.elapsed(),
        },
        log_prob_sum,
    ))
}
