//! Standard LSTM cell, kept for the with-LSTM ablation arm. Its hidden
//! state supplies the query vector of the query-bearing pointer decoder.

use crate::error::{Error, Result};
use crate::tensor::{ops, Tape, Tensor};

/// Gate weights stacked along the output axis in the order
/// input, forget, cell, output.
#[derive(Clone, Debug)]
pub struct LstmCell {
    pub w_x: Tensor,
    pub w_h: Tensor,
    pub bias: Tensor,
    pub hidden: usize,
}

fn sigmoid(tape: &mut Tape, x: &Tensor) -> Result<Tensor> {
    let half = ops::scale(tape, x, 0.5)?;
    let t = ops::tanh(tape, &half)?;
    let shifted = ops::add_scalar(tape, &t, 1.0)?;
    ops::scale(tape, &shifted, 0.5)
}

/// One recurrence step: `x` is 1 x d_in, `h` and `c` are 1 x hidden.
/// Returns the new `(h, c)`.
pub fn lstm_step(
    tape: &mut Tape,
    cell: &LstmCell,
    x: &Tensor,
    h: &Tensor,
    c: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let d = cell.hidden;
    if h.shape() != (1, d) || c.shape() != (1, d) {
        return Err(Error::shape(
            "lstm_step",
            format!("state must be 1x{d}, got h {:?}, c {:?}", h.shape(), c.shape()),
        ));
    }
    let from_x = ops::matmul(tape, x, &cell.w_x)?;
    let from_h = ops::matmul(tape, h, &cell.w_h)?;
    let gates = ops::add(tape, &from_x, &from_h)?;
    let gates = ops::add(tape, &gates, &cell.bias)?;

    let i_pre = ops::slice_cols(tape, &gates, 0, d)?;
    let i_gate = sigmoid(tape, &i_pre)?;
    let f_pre = ops::slice_cols(tape, &gates, d, d)?;
    let f_gate = sigmoid(tape, &f_pre)?;
    let g_pre = ops::slice_cols(tape, &gates, 2 * d, d)?;
    let g_cell = ops::tanh(tape, &g_pre)?;
    let o_pre = ops::slice_cols(tape, &gates, 3 * d, d)?;
    let o_gate = sigmoid(tape, &o_pre)?;

    let keep = ops::elementwise_mul(tape, &f_gate, c)?;
    let write = ops::elementwise_mul(tape, &i_gate, &g_cell)?;
    let c_next = ops::add(tape, &keep, &write)?;
    let c_squashed = ops::tanh(tape, &c_next)?;
    let h_next = ops::elementwise_mul(tape, &o_gate, &c_squashed)?;
    Ok((h_next, c_next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpn::init_lstm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_and_state_yield_zero_output() {
        let cell = LstmCell {
            w_x: Tensor::zeros(2, 12),
            w_h: Tensor::zeros(3, 12),
            bias: Tensor::zeros(1, 12),
            hidden: 3,
        };
        let mut tape = Tape::new();
        let x = Tensor::row_vec(vec![0.7, -0.3]);
        let h = Tensor::zeros(1, 3);
        let c = Tensor::zeros(1, 3);
        let (h2, _) = lstm_step(&mut tape, &cell, &x, &h, &c).unwrap();
        assert!(h2.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_inputs_stay_inside_the_tanh_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cell = init_lstm(2, 3, &mut rng);
        cell.bias = Tensor::from_vec(1, 12, vec![50.0; 12]).unwrap();
        let mut tape = Tape::new();
        let x = Tensor::row_vec(vec![100.0, 100.0]);
        let h = Tensor::row_vec(vec![0.9, -0.9, 0.5]);
        let c = Tensor::row_vec(vec![0.1, 0.2, -0.3]);
        let (h2, _) = lstm_step(&mut tape, &cell, &x, &h, &c).unwrap();
        assert!(h2.data().iter().all(|&v| v > -1.0 && v < 1.0));
    }

    // Scalar-by-scalar recurrence oracle.
    fn oracle(cell: &LstmCell, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = cell.hidden;
        let sig = |v: f64| 0.5 * ((0.5 * v).tanh() + 1.0);
        let gate = |col: usize| -> f64 {
            let mut s = cell.bias.get(0, col);
            for (t, &xv) in x.iter().enumerate() {
                s += xv * cell.w_x.get(t, col);
            }
            for (t, &hv) in h.iter().enumerate() {
                s += hv * cell.w_h.get(t, col);
            }
            s
        };
        let mut h2 = vec![0.0; d];
        let mut c2 = vec![0.0; d];
        for k in 0..d {
            let i = sig(gate(k));
            let f = sig(gate(d + k));
            let g = gate(2 * d + k).tanh();
            let o = sig(gate(3 * d + k));
            c2[k] = f * c[k] + i * g;
            h2[k] = o * c2[k].tanh();
        }
        (h2, c2)
    }

    #[test]
    fn matches_the_scalar_recurrence_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cell = init_lstm(3, 4, &mut rng);
        let x = vec![0.3, -0.8, 1.2];
        let h = vec![0.05, -0.4, 0.7, 0.0];
        let c = vec![-0.2, 0.6, 0.1, 0.9];

        let mut tape = Tape::new();
        let (h2, c2) = lstm_step(
            &mut tape,
            &cell,
            &Tensor::row_vec(x.clone()),
            &Tensor::row_vec(h.clone()),
            &Tensor::row_vec(c.clone()),
        )
        .unwrap();
        let (eh, ec) = oracle(&cell, &x, &h, &c);
        for k in 0..4 {
            assert!((h2.data()[k] - eh[k]).abs() < 1e-12);
            assert!((c2.data()[k] - ec[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn state_shape_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cell = init_lstm(2, 3, &mut rng);
        let mut tape = Tape::new();
        let bad = lstm_step(
            &mut tape,
            &cell,
            &Tensor::row_vec(vec![1.0, 2.0]),
            &Tensor::row_vec(vec![0.0; 4]),
            &Tensor::row_vec(vec![0.0; 3]),
        );
        assert!(matches!(bad, Err(Error::ShapeMismatch { .. })));
    }
}
