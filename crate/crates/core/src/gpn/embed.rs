//! Graph embedding layers over the complete graph.
//!
//! Each layer computes `X' = gamma * X . theta + (1 - gamma) * agg(X / N)`
//! where `agg` is an affine map followed by tanh and `N` is the node count.
//! All operations are row-wise, so node order commutes with embedding.

use crate::error::Result;
use crate::tensor::{ops, Tape, Tensor};

/// One embedding layer: skip projection `theta`, learnable mix `gamma`, and
/// the affine aggregator weights.
#[derive(Clone, Debug)]
pub struct GraphEmbedLayer {
    pub theta: Tensor,
    pub gamma: Tensor,
    pub agg_weight: Tensor,
    pub agg_bias: Tensor,
}

/// Applies the layer stack to per-node features `x0` (N x input_dim) and
/// returns the final node embeddings (N x hidden_dim).
pub fn graph_embed(tape: &mut Tape, layers: &[GraphEmbedLayer], x0: &Tensor) -> Result<Tensor> {
    let n = x0.rows() as f64;
    let one = Tensor::scalar(1.0);
    let mut x = x0.clone();
    for layer in layers {
        let skip = ops::matmul(tape, &x, &layer.theta)?;
        let skip = ops::scale_by(tape, &skip, &layer.gamma)?;

        let pooled = ops::scale(tape, &x, 1.0 / n)?;
        let agg = ops::matmul(tape, &pooled, &layer.agg_weight)?;
        let agg = ops::add_row(tape, &agg, &layer.agg_bias)?;
        let agg = ops::tanh(tape, &agg)?;
        let residual_gate = ops::sub(tape, &one, &layer.gamma)?;
        let agg = ops::scale_by(tape, &agg, &residual_gate)?;

        x = ops::add(tape, &skip, &agg)?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpn::{init_encoder, GraphEmbedConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layer(theta: Tensor, gamma: f64, agg_w: Tensor, agg_b: Tensor) -> GraphEmbedLayer {
        GraphEmbedLayer {
            theta,
            gamma: Tensor::scalar(gamma),
            agg_weight: agg_w,
            agg_bias: agg_b,
        }
    }

    #[test]
    fn gamma_one_suppresses_the_aggregator() {
        let mut tape = Tape::new();
        let x0 = Tensor::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.25]]).unwrap();
        let theta = Tensor::from_rows(&[vec![2.0, 0.0], vec![1.0, -1.0]]).unwrap();
        let l = layer(
            theta.clone(),
            1.0,
            Tensor::from_rows(&[vec![5.0, 5.0], vec![5.0, 5.0]]).unwrap(),
            Tensor::row_vec(vec![9.0, 9.0]),
        );
        let out = graph_embed(&mut tape, &[l], &x0).unwrap();
        let expected = ops::matmul(&mut tape, &x0, &theta).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn gamma_zero_on_identical_features_gives_identical_rows() {
        let mut tape = Tape::new();
        let x0 = Tensor::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GraphEmbedConfig {
            layers: 1,
            input_dim: 1,
            hidden_dim: 4,
            gamma_init: 0.0,
        };
        let enc = init_encoder(&cfg, &mut rng).unwrap();
        let out = graph_embed(&mut tape, &enc, &x0).unwrap();
        for j in 0..4 {
            assert_eq!(out.get(0, j), out.get(1, j));
            assert_eq!(out.get(0, j), out.get(2, j));
        }
    }

    // Straight-line oracle: evaluate the layer with plain nested loops.
    fn oracle_layer(x: &[Vec<f64>], l: &GraphEmbedLayer) -> Vec<Vec<f64>> {
        let n = x.len();
        let d_in = x[0].len();
        let d_out = l.theta.cols();
        let gamma = l.gamma.item();
        let mut out = vec![vec![0.0; d_out]; n];
        for i in 0..n {
            for j in 0..d_out {
                let mut skip = 0.0;
                let mut agg = 0.0;
                for t in 0..d_in {
                    skip += x[i][t] * l.theta.get(t, j);
                    agg += x[i][t] / n as f64 * l.agg_weight.get(t, j);
                }
                let agg = (agg + l.agg_bias.get(0, j)).tanh();
                out[i][j] = gamma * skip + (1.0 - gamma) * agg;
            }
        }
        out
    }

    #[test]
    fn matches_straight_line_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = GraphEmbedConfig {
            layers: 2,
            input_dim: 2,
            hidden_dim: 3,
            gamma_init: 0.37,
        };
        let enc = init_encoder(&cfg, &mut rng).unwrap();
        let rows = vec![
            vec![0.3, -1.2],
            vec![2.0, 0.5],
            vec![-0.7, 0.9],
            vec![1.1, -0.4],
        ];
        let x0 = Tensor::from_rows(&rows).unwrap();

        let mut tape = Tape::new();
        let got = graph_embed(&mut tape, &enc, &x0).unwrap();

        let mut expect = rows;
        for l in &enc {
            expect = oracle_layer(&expect, l);
        }
        for i in 0..4 {
            for j in 0..3 {
                assert!((got.get(i, j) - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = GraphEmbedConfig {
            layers: 3,
            input_dim: 2,
            hidden_dim: 4,
            gamma_init: 0.5,
        };
        let enc = init_encoder(&cfg, &mut rng).unwrap();
        let rows = vec![
            vec![0.1, 0.9],
            vec![0.8, -0.3],
            vec![-0.5, 0.2],
            vec![0.4, 0.6],
            vec![-0.9, -0.1],
        ];
        let perm = [3usize, 0, 4, 1, 2];

        let mut tape = Tape::new();
        let base = graph_embed(&mut tape, &enc, &Tensor::from_rows(&rows).unwrap()).unwrap();
        let permuted_rows: Vec<Vec<f64>> = perm.iter().map(|&p| rows[p].clone()).collect();
        let permuted =
            graph_embed(&mut tape, &enc, &Tensor::from_rows(&permuted_rows).unwrap()).unwrap();

        for (i, &p) in perm.iter().enumerate() {
            for j in 0..4 {
                assert!((permuted.get(i, j) - base.get(p, j)).abs() <= 1e-12);
            }
        }
    }
}
