//! Pointer attention: `u_j = v^T tanh(W_r r_j + W_q q)` over unmasked nodes.
//!
//! The query term is optional; without it the decoder evaluates the
//! query-free form used when the LSTM is eliminated. Both variants share
//! this code path, so setting `W_q` to zero reproduces the query-free
//! logits exactly.

use crate::error::{Error, Result};
use crate::tensor::{ops, Tape, Tensor};

/// Attention parameters. `w_q` is present only in the query-bearing variant.
#[derive(Clone, Debug)]
pub struct PointerDecoder {
    pub w_r: Tensor,
    pub w_q: Option<Tensor>,
    pub v: Tensor,
}

/// Computes attention logits for each reference row. The mask marks nodes
/// that may not be selected; it must leave at least one node available.
/// Masking itself is applied downstream by the softmax.
pub fn pointer_logits(
    tape: &mut Tape,
    decoder: &PointerDecoder,
    refs: &Tensor,
    query: Option<&Tensor>,
    mask: &[bool],
) -> Result<Tensor> {
    if mask.len() != refs.rows() {
        return Err(Error::shape(
            "pointer_logits",
            format!("{} refs vs {} mask entries", refs.rows(), mask.len()),
        ));
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::AllMasked);
    }
    let mut pre = ops::matmul(tape, refs, &decoder.w_r)?;
    if let (Some(w_q), Some(q)) = (decoder.w_q.as_ref(), query) {
        let projected = ops::matmul(tape, q, w_q)?;
        pre = ops::add_row(tape, &pre, &projected)?;
    }
    let hidden = ops::tanh(tape, &pre)?;
    ops::matmul(tape, &hidden, &decoder.v)
}
