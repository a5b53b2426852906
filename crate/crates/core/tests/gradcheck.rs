//! Finite-difference gradient checks for every differentiable op and for
//! the model-level compositions (graph embedding, pointer attention,
//! masked softmax, and the frozen-action policy-gradient surrogate).

mod common;

use common::{
    check_graph_embed, check_masked_softmax, check_pointer_logits, check_reinforce_surrogate,
    gradcheck, project, rand_tensor, TOL,
};
use gpn_core::tensor::{ops, Tape, Tensor};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn primitive_ops_match_finite_differences_over_100_seeds() {
    let mut checked = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 1 + rng.random_range(0..4);
        let k = 1 + rng.random_range(0..4);
        let n = 1 + rng.random_range(0..4);

        // matmul
        let r = rand_tensor(&mut rng, m, n);
        gradcheck(
            &[rand_tensor(&mut rng, m, k), rand_tensor(&mut rng, k, n)],
            &move |tape, t| {
                let out = ops::matmul(tape, &t[0], &t[1]).unwrap();
                project(tape, &out, &r)
            },
            TOL,
            "matmul",
        );

        // add / sub / elementwise_mul
        let r = rand_tensor(&mut rng, m, k);
        gradcheck(
            &[rand_tensor(&mut rng, m, k), rand_tensor(&mut rng, m, k)],
            &move |tape, t| {
                let s = ops::add(tape, &t[0], &t[1]).unwrap();
                let d = ops::sub(tape, &s, &t[1]).unwrap();
                let p = ops::elementwise_mul(tape, &d, &t[1]).unwrap();
                project(tape, &p, &r)
            },
            TOL,
            "add/sub/elementwise_mul",
        );

        // scale, add_scalar, scale_by, tanh, mean
        gradcheck(
            &[rand_tensor(&mut rng, m, k), rand_tensor(&mut rng, 1, 1)],
            &|tape, t| {
                let a = ops::scale(tape, &t[0], 0.75).unwrap();
                let a = ops::add_scalar(tape, &a, -0.3).unwrap();
                let a = ops::scale_by(tape, &a, &t[1]).unwrap();
                let a = ops::tanh(tape, &a).unwrap();
                ops::mean(tape, &a).unwrap()
            },
            TOL,
            "scale/add_scalar/scale_by/tanh/mean",
        );

        // concat_rows + row + slice_cols + add_row
        let r = rand_tensor(&mut rng, 1, k);
        gradcheck(
            &[
                rand_tensor(&mut rng, m, k),
                rand_tensor(&mut rng, n, k),
                rand_tensor(&mut rng, 1, k),
            ],
            &move |tape, t| {
                let stacked = ops::concat_rows(tape, &t[0], &t[1]).unwrap();
                let shifted = ops::add_row(tape, &stacked, &t[2]).unwrap();
                let first = ops::row(tape, &shifted, 0).unwrap();
                let sliced = ops::slice_cols(tape, &first, 0, first.cols()).unwrap();
                project(tape, &sliced, &r)
            },
            TOL,
            "concat_rows/add_row/row/slice_cols",
        );

        // ln + select over positive inputs
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..k);
        let pos =
            Tensor::from_vec(m, k, (0..m * k).map(|_| rng.random_range(0.5..2.0)).collect())
                .unwrap();
        gradcheck(
            &[pos],
            &move |tape, t| {
                let l = ops::ln(tape, &t[0]).unwrap();
                ops::select(tape, &l, i, j).unwrap()
            },
            TOL,
            "ln/select",
        );

        // masked softmax under a random mask
        let len = 2 + rng.random_range(0..5);
        let mut mask: Vec<bool> = (0..len).map(|_| rng.random::<f64>() < 0.4).collect();
        mask[rng.random_range(0..len)] = false;
        let r = rand_tensor(&mut rng, len, 1);
        let mask_for_loss = mask.clone();
        gradcheck(
            &[rand_tensor(&mut rng, len, 1)],
            &move |tape, t| {
                let p = ops::masked_softmax(tape, &t[0], &mask_for_loss).unwrap();
                project(tape, &p, &r)
            },
            TOL,
            "masked_softmax",
        );

        checked += 10;
    }
    assert!(checked >= 100, "ran {checked} primitive checks");
}

#[test]
fn masked_softmax_jacobian_matches_finite_differences() {
    // Logits [1, 2, 3], no mask: check the full Jacobian row by row.
    let logits = Tensor::column(vec![1.0, 2.0, 3.0]);
    for out_idx in 0..3 {
        gradcheck(
            &[logits.clone()],
            &move |tape, t| {
                let p = ops::masked_softmax(tape, &t[0], &[false; 3]).unwrap();
                ops::select(tape, &p, out_idx, 0).unwrap()
            },
            1e-6,
            "softmax jacobian",
        );
    }
}

#[test]
fn pointer_energy_matches_finite_differences_tightly() {
    // loss = sum_j v^T tanh(W r_j), checked at 1e-5 relative.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let w = rand_tensor(&mut rng, 3, 3);
    let v = rand_tensor(&mut rng, 3, 1);
    let refs = rand_tensor(&mut rng, 3, 3);
    gradcheck(
        &[w, v, refs],
        &|tape, t| {
            let pre = ops::matmul(tape, &t[2], &t[0]).unwrap();
            let h = ops::tanh(tape, &pre).unwrap();
            let u = ops::matmul(tape, &h, &t[1]).unwrap();
            ops::sum(tape, &u).unwrap()
        },
        1e-5,
        "v tanh(Wr)",
    );
}

#[test]
fn graph_embed_gradients_match_finite_differences() {
    assert_eq!(check_graph_embed(0..30), 30);
}

#[test]
fn pointer_logits_gradients_match_finite_differences() {
    assert_eq!(check_pointer_logits(0..30), 30);
}

#[test]
fn masked_softmax_model_gradients_match_finite_differences() {
    assert_eq!(check_masked_softmax(0..20), 20);
}

#[test]
fn frozen_action_reinforce_surrogate_matches_finite_differences() {
    assert_eq!(check_reinforce_surrogate(0..15), 15);
}

#[test]
fn lstm_step_gradients_match_finite_differences() {
    use gpn_core::gpn::{lstm_step, LstmCell};
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let d_in = 2;
        let d = 3;
        let r = rand_tensor(&mut rng, 1, d);
        let inputs = vec![
            rand_tensor(&mut rng, d_in, 4 * d),
            rand_tensor(&mut rng, d, 4 * d),
            rand_tensor(&mut rng, 1, 4 * d),
            rand_tensor(&mut rng, 1, d_in),
            rand_tensor(&mut rng, 1, d),
            rand_tensor(&mut rng, 1, d),
        ];
        gradcheck(
            &inputs,
            &move |tape, t| {
                let cell = LstmCell {
                    w_x: t[0].clone(),
                    w_h: t[1].clone(),
                    bias: t[2].clone(),
                    hidden: 3,
                };
                let (h, _) = lstm_step(tape, &cell, &t[3], &t[4], &t[5]).unwrap();
                project(tape, &h, &r)
            },
            TOL,
            "lstm_step",
        );
    }
}

#[test]
fn replayed_graphs_are_bit_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = rand_tensor(&mut rng, 3, 3);
    let b = rand_tensor(&mut rng, 3, 1);
    let run = |a: &Tensor, b: &Tensor| -> (f64, Vec<f64>, Vec<f64>) {
        let mut tape = Tape::new();
        let wa = tape.var(a);
        let wb = tape.var(b);
        let prod = ops::matmul(&mut tape, &wa, &wb).unwrap();
        let h = ops::tanh(&mut tape, &prod).unwrap();
        let loss = ops::mean(&mut tape, &h).unwrap();
        let grads = tape.backward(&loss).unwrap();
        (
            loss.item(),
            grads.wrt(&wa).unwrap().data().to_vec(),
            grads.wrt(&wb).unwrap().data().to_vec(),
        )
    };
    let (l1, ga1, gb1) = run(&a, &b);
    let (l2, ga2, gb2) = run(&a, &b);
    assert_eq!(l1.to_bits(), l2.to_bits());
    assert_eq!(ga1, ga2);
    assert_eq!(gb1, gb2);
}
