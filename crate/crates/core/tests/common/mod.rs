//! Shared finite-difference machinery for the gradient-check and
//! acceptance test targets.

use gpn_core::gpn::{graph_embed, pointer_logits, GraphEmbedLayer, PointerDecoder};
use gpn_core::instance::{generate_qap, GeneratorConfig};
use gpn_core::solver::{solve_qap_traced, DecodeMode, TwoStageGpn};
use gpn_core::tensor::{ops, Tape, Tensor};
use gpn_core::training::{init_two_stage, ModelKind, TrainConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Central finite differences of `f` over a flat parameter vector.
pub fn fd_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for k in 0..x.len() {
        let orig = xp[k];
        xp[k] = orig + H;
        let plus = f(&xp);
        xp[k] = orig - H;
        let minus = f(&xp);
        xp[k] = orig;
        g[k] = (plus - minus) / (2.0 * H);
    }
    g
}

pub fn rebuild(shapes: &[(usize, usize)], flat: &[f64]) -> Vec<Tensor> {
    let mut out = Vec::with_capacity(shapes.len());
    let mut off = 0;
    for &(r, c) in shapes {
        out.push(Tensor::from_vec(r, c, flat[off..off + r * c].to_vec()).unwrap());
        off += r * c;
    }
    out
}

/// Compares tape gradients against central differences for a scalar loss
/// built from watched copies of `inputs`.
pub fn gradcheck(
    inputs: &[Tensor],
    forward: &dyn Fn(&mut Tape, &[Tensor]) -> Tensor,
    tol: f64,
    label: &str,
) {
    let shapes: Vec<(usize, usize)> = inputs.iter().map(|t| t.shape()).collect();
    let flat: Vec<f64> = inputs.iter().flat_map(|t| t.data().to_vec()).collect();

    let mut tape = Tape::new();
    let tracked: Vec<Tensor> = inputs.iter().map(|t| tape.var(t)).collect();
    let loss = forward(&mut tape, &tracked);
    let grads = tape.backward(&loss).unwrap();

    let numeric = fd_grad(
        &|x: &[f64]| {
            let rebuilt = rebuild(&shapes, x);
            let mut scratch = Tape::new();
            forward(&mut scratch, &rebuilt).item()
        },
        &flat,
    );

    let mut off = 0;
    for (input, tracked) in inputs.iter().zip(&tracked) {
        let g = grads.wrt(tracked);
        for k in 0..input.len() {
            let analytic = g.map_or(0.0, |g| g.data()[k]);
            let err = rel_err(analytic, numeric[off + k]);
            assert!(
                err <= tol,
                "{label}: entry {k} of {:?} has analytic {analytic} vs fd {} (rel {err})",
                input.shape(),
                numeric[off + k]
            );
        }
        off += input.len();
    }
}

pub fn rand_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::uniform(rng, rows, cols, 1.0)
}

/// Weighted sum against a fixed projection, turning any output into a
/// scalar loss that exercises every entry.
pub fn project(tape: &mut Tape, out: &Tensor, weights: &Tensor) -> Tensor {
    let weighted = ops::elementwise_mul(tape, out, weights).unwrap();
    ops::sum(tape, &weighted).unwrap()
}

/// Gradient check of one graph-embedding layer (input and all parameters).
pub fn check_graph_embed(seeds: std::ops::Range<u64>) -> usize {
    let mut checked = 0;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 2 + (seed as usize % 4);
        let d_in = 1 + (seed as usize % 3);
        let d_h = 2 + (seed as usize % 3);
        let r = rand_tensor(&mut rng, n, d_h);
        let inputs = vec![
            rand_tensor(&mut rng, n, d_in),
            rand_tensor(&mut rng, d_in, d_h),
            Tensor::scalar(rng.random_range(0.1..0.9)),
            rand_tensor(&mut rng, d_in, d_h),
            rand_tensor(&mut rng, 1, d_h),
        ];
        gradcheck(
            &inputs,
            &move |tape, t| {
                let layer = GraphEmbedLayer {
                    theta: t[1].clone(),
                    gamma: t[2].clone(),
                    agg_weight: t[3].clone(),
                    agg_bias: t[4].clone(),
                };
                let out = graph_embed(tape, std::slice::from_ref(&layer), &t[0]).unwrap();
                project(tape, &out, &r)
            },
            TOL,
            "graph_embed",
        );
        checked += 1;
    }
    checked
}

/// Gradient check of the pointer attention (both decoder variants).
pub fn check_pointer_logits(seeds: std::ops::Range<u64>) -> usize {
    let mut checked = 0;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let n = 2 + (seed as usize % 5);
        let d = 2 + (seed as usize % 3);
        let with_query = seed % 2 == 0;
        let mask = vec![false; n];
        let r = rand_tensor(&mut rng, n, 1);
        let mut inputs = vec![
            rand_tensor(&mut rng, n, d),
            rand_tensor(&mut rng, d, d),
            rand_tensor(&mut rng, d, 1),
        ];
        if with_query {
            inputs.push(rand_tensor(&mut rng, d, d));
            inputs.push(rand_tensor(&mut rng, 1, d));
        }
        let mask_c = mask.clone();
        gradcheck(
            &inputs,
            &move |tape, t| {
                let decoder = PointerDecoder {
                    w_r: t[1].clone(),
                    w_q: if with_query { Some(t[3].clone()) } else { None },
                    v: t[2].clone(),
                };
                let query = if with_query { Some(t[4].clone()) } else { None };
                let logits =
                    pointer_logits(tape, &decoder, &t[0], query.as_ref(), &mask_c).unwrap();
                project(tape, &logits, &r)
            },
            TOL,
            "pointer_logits",
        );
        checked += 1;
    }
    checked
}

/// Gradient check of the masked softmax under random masks.
pub fn check_masked_softmax(seeds: std::ops::Range<u64>) -> usize {
    let mut checked = 0;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let len = 2 + (seed as usize % 6);
        let mut mask: Vec<bool> = (0..len).map(|_| rng.random::<f64>() < 0.4).collect();
        mask[rng.random_range(0..len)] = false;
        let r = rand_tensor(&mut rng, len, 1);
        let mask_c = mask.clone();
        gradcheck(
            &[rand_tensor(&mut rng, len, 1)],
            &move |tape, t| {
                let p = ops::masked_softmax(tape, &t[0], &mask_c).unwrap();
                project(tape, &p, &r)
            },
            TOL,
            "masked_softmax",
        );
        checked += 1;
    }
    checked
}

/// Gradient check of the frozen-action REINFORCE surrogate: replaying a
/// fixed trajectory makes the log-likelihood a deterministic function of
/// the parameters.
pub fn check_reinforce_surrogate(seeds: std::ops::Range<u64>) -> usize {
    let mut checked = 0;
    for seed in seeds {
        let cfg = TrainConfig {
            train_n: 4,
            hidden_dim: 3,
            layers: 1,
            seed,
            ..TrainConfig::default_for(ModelKind::TwoStageQap)
        };
        let base = init_two_stage(&cfg).unwrap();
        let q = generate_qap(&GeneratorConfig::new(4, 1000 + seed)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tape = Tape::new();
        let (sampled, _) =
            solve_qap_traced(&base, &mut tape, &q, DecodeMode::Sample, &mut rng).unwrap();
        let anchor = 0;
        let mut actions = vec![anchor * 4 + sampled.perm[anchor]];
        for offset in 1..4 {
            actions.push(sampled.perm[(anchor + offset) % 4]);
        }
        let advantage = -sampled.cost - 1.5;

        let named = base.params();
        let inputs: Vec<Tensor> = named.iter().map(|(_, t)| (*t).clone()).collect();
        let template = base.clone();
        let q_c = q.clone();
        let actions_c = actions.clone();
        gradcheck(
            &inputs,
            &move |tape, t| {
                let mut model: TwoStageGpn = template.clone();
                for (slot, value) in model.params_mut().into_iter().zip(t) {
                    *slot = value.clone();
                }
                let mut dummy = ChaCha8Rng::seed_from_u64(0);
                let (_, log_prob) = solve_qap_traced(
                    &model,
                    tape,
                    &q_c,
                    DecodeMode::Replay(actions_c.clone()),
                    &mut dummy,
                )
                .unwrap();
                ops::scale(tape, &log_prob, -advantage).unwrap()
            },
            TOL,
            "reinforce surrogate",
        );
        checked += 1;
    }
    checked
}
