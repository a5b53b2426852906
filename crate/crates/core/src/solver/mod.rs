//! Decoding pipelines: the matrix-input TSP pointer network and the
//! two-stage network for QAP, plus objective evaluation and the gap metric.

use std::time::Duration;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gpn::{
    init_encoder, init_lstm, init_pointer, GraphEmbedConfig, GraphEmbedLayer, LstmCell,
    PointerDecoder,
};
use crate::tensor::{Tape, Tensor};

mod objective;
mod qap;
mod tsp;

pub use objective::{evaluate_qap_cost, evaluate_tour, gap_percent, is_permutation};
pub use qap::{solve_qap, solve_qap_traced};
pub use tsp::{solve_matrix_tsp, solve_matrix_tsp_traced};

/// How per-step node features are built for the TSP decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMode {
    /// Each node's feature is the distance from the currently selected city
    /// (one scalar per node, refreshed every step). This is the default.
    CurrentRow,
    /// Each node's feature vector is its full distance row; the encoder
    /// input width must then equal the instance size.
    FullMatrix,
}

/// Pointer network for matrix-input TSP: graph-embedding encoder plus a
/// query-free pointer decoder. The optional LSTM (with its query projection
/// in the decoder) forms the with-LSTM ablation arm.
#[derive(Clone, Debug)]
pub struct MatrixTspGpn {
    pub encoder: Vec<GraphEmbedLayer>,
    pub decoder: PointerDecoder,
    pub lstm: Option<LstmCell>,
    pub hidden: usize,
    pub feature_mode: FeatureMode,
}

impl MatrixTspGpn {
    /// Query-free model (no LSTM). Requires scalar node features.
    pub fn new<R: Rng>(cfg: &GraphEmbedConfig, rng: &mut R) -> Result<Self> {
        Self::build(cfg, false, rng)
    }

    /// Ablation arm: LSTM over the current node embedding supplies the query.
    pub fn with_lstm<R: Rng>(cfg: &GraphEmbedConfig, rng: &mut R) -> Result<Self> {
        Self::build(cfg, true, rng)
    }

    fn build<R: Rng>(cfg: &GraphEmbedConfig, lstm: bool, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        if cfg.input_dim != 1 {
            return Err(Error::shape(
                "matrix_tsp_gpn",
                format!(
                    "per-node features are scalar; input_dim {} needs FullMatrix mode",
                    cfg.input_dim
                ),
            ));
        }
        let encoder = init_encoder(cfg, rng)?;
        let decoder = init_pointer(cfg.hidden_dim, lstm, rng);
        let lstm = lstm.then(|| init_lstm(cfg.hidden_dim, cfg.hidden_dim, rng));
        Ok(MatrixTspGpn {
            encoder,
            decoder,
            lstm,
            hidden: cfg.hidden_dim,
            feature_mode: FeatureMode::CurrentRow,
        })
    }

    /// Switches to full-matrix features; the encoder input width must match
    /// the instance size at decode time.
    pub fn full_matrix<R: Rng>(cfg: &GraphEmbedConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let encoder = init_encoder(cfg, rng)?;
        let decoder = init_pointer(cfg.hidden_dim, false, rng);
        Ok(MatrixTspGpn {
            encoder,
            decoder,
            lstm: None,
            hidden: cfg.hidden_dim,
            feature_mode: FeatureMode::FullMatrix,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].theta.rows()
    }

    /// Named parameters in a stable order (encoder, pointer, then LSTM).
    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, l) in self.encoder.iter().enumerate() {
            out.push((format!("embed.{i}.theta"), &l.theta));
            out.push((format!("embed.{i}.gamma"), &l.gamma));
            out.push((format!("embed.{i}.agg_weight"), &l.agg_weight));
            out.push((format!("embed.{i}.agg_bias"), &l.agg_bias));
        }
        out.push(("pointer.w_r".into(), &self.decoder.w_r));
        if let Some(w_q) = &self.decoder.w_q {
            out.push(("pointer.w_q".into(), w_q));
        }
        out.push(("pointer.v".into(), &self.decoder.v));
        if let Some(c) = &self.lstm {
            out.push(("lstm.w_x".into(), &c.w_x));
            out.push(("lstm.w_h".into(), &c.w_h));
            out.push(("lstm.bias".into(), &c.bias));
        }
        out
    }

    /// Mutable view of the parameters, in the same order as [`Self::params`].
    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for l in &mut self.encoder {
            out.push(&mut l.theta);
            out.push(&mut l.gamma);
            out.push(&mut l.agg_weight);
            out.push(&mut l.agg_bias);
        }
        out.push(&mut self.decoder.w_r);
        if let Some(w_q) = &mut self.decoder.w_q {
            out.push(w_q);
        }
        out.push(&mut self.decoder.v);
        if let Some(c) = &mut self.lstm {
            out.push(&mut c.w_x);
            out.push(&mut c.w_h);
            out.push(&mut c.bias);
        }
        out
    }

    /// Copy of the model whose parameters are tracked on `tape`.
    pub fn tracked(&self, tape: &mut Tape) -> Self {
        MatrixTspGpn {
            encoder: self
                .encoder
                .iter()
                .map(|l| GraphEmbedLayer {
                    theta: tape.var(&l.theta),
                    gamma: tape.var(&l.gamma),
                    agg_weight: tape.var(&l.agg_weight),
                    agg_bias: tape.var(&l.agg_bias),
                })
                .collect(),
            decoder: PointerDecoder {
                w_r: tape.var(&self.decoder.w_r),
                w_q: self.decoder.w_q.as_ref().map(|t| tape.var(t)),
                v: tape.var(&self.decoder.v),
            },
            lstm: self.lstm.as_ref().map(|c| LstmCell {
                w_x: tape.var(&c.w_x),
                w_h: tape.var(&c.w_h),
                bias: tape.var(&c.bias),
                hidden: c.hidden,
            }),
            hidden: self.hidden,
            feature_mode: self.feature_mode,
        }
    }
}

/// How stage-2 node features are built for each remaining factory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage2Features {
    /// Feature of location l is the sum of DFP entries the assignment
    /// (factory -> l) would add against everything placed so far — the
    /// exact incremental cost landscape. Default.
    CostIncrement,
    /// Feature of location l is the selected block's entry B[l][k]
    /// (the anchor's distance row scaled by its flow to the factory).
    /// Kept as an ablation arm: per-step normalization cancels the flow
    /// factor, leaving the policy blind to the flow matrix.
    BlockColumn,
}

/// Two independent pointer networks for QAP: one selects a block of the
/// distance-flow product matrix (fixing the first assignment), the other
/// decodes the remaining assignments from the within-block cost landscape.
#[derive(Clone, Debug)]
pub struct TwoStageGpn {
    pub block_model: MatrixTspGpn,
    pub inblock_model: MatrixTspGpn,
    pub stage2: Stage2Features,
}

impl TwoStageGpn {
    pub fn new<R: Rng>(cfg: &GraphEmbedConfig, rng: &mut R) -> Result<Self> {
        Ok(TwoStageGpn {
            block_model: MatrixTspGpn::new(cfg, rng)?,
            inblock_model: MatrixTspGpn::new(cfg, rng)?,
            stage2: Stage2Features::CostIncrement,
        })
    }

    pub fn with_stage2(mut self, stage2: Stage2Features) -> Self {
        self.stage2 = stage2;
        self
    }

    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (name, t) in self.block_model.params() {
            out.push((format!("block.{name}"), t));
        }
        for (name, t) in self.inblock_model.params() {
            out.push((format!("inblock.{name}"), t));
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = self.block_model.params_mut();
        out.extend(self.inblock_model.params_mut());
        out
    }

    pub fn tracked(&self, tape: &mut Tape) -> Self {
        TwoStageGpn {
            block_model: self.block_model.tracked(tape),
            inblock_model: self.inblock_model.tracked(tape),
            stage2: self.stage2,
        }
    }
}

/// How a decode chooses actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeMode {
    Greedy,
    Sample,
    /// Replay a fixed action sequence (one entry per decoding step).
    Replay(Vec<usize>),
}

/// A decoded assignment or tour with its re-evaluated objective value.
#[derive(Clone, Debug)]
pub struct Solution {
    /// For QAP: `perm[factory] = location`. For TSP: the visit order.
    pub perm: Vec<usize>,
    pub cost: f64,
    pub log_prob_sum: f64,
    pub elapsed: Duration,
}

/// Min-max normalization to `[0, 1]`; constant vectors map to all zeros.
pub(crate) fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        let span = max - min;
        values.iter().map(|&v| (v - min) / span).collect()
    } else {
        vec![0.0; values.len()]
    }
}

pub(crate) struct ReplayCursor<'a> {
    actions: &'a [usize],
    pos: usize,
}

impl<'a> ReplayCursor<'a> {
    pub fn new(actions: &'a [usize], expected: usize) -> Result<Self> {
        if actions.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "replay sequence has {} actions, decode needs {expected}",
                actions.len()
            )));
        }
        Ok(ReplayCursor { actions, pos: 0 })
    }

    pub fn next(&mut self) -> usize {
        let a = self.actions[self.pos];
        self.pos += 1;
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalization_maps_to_unit_interval() {
        let v = min_max_normalize(&[2.0, 6.0, 4.0]);
        assert_eq!(v, vec![0.0, 1.0, 0.5]);
        assert_eq!(min_max_normalize(&[3.0, 3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn param_lists_align() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = GraphEmbedConfig {
            layers: 2,
            input_dim: 1,
            hidden_dim: 4,
            gamma_init: 0.5,
        };
        let mut model = MatrixTspGpn::with_lstm(&cfg, &mut rng).unwrap();
        let names: Vec<String> = model.params().into_iter().map(|(n, _)| n).collect();
        let shapes: Vec<(usize, usize)> =
            model.params().into_iter().map(|(_, t)| t.shape()).collect();
        let mut_shapes: Vec<(usize, usize)> =
            model.params_mut().into_iter().map(|t| t.shape()).collect();
        assert_eq!(shapes, mut_shapes);
        assert!(names.contains(&"pointer.w_q".to_string()));
        assert!(names.contains(&"lstm.w_x".to_string()));
    }

    #[test]
    fn tracked_copy_preserves_values_and_is_tracked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = GraphEmbedConfig {
            layers: 1,
            input_dim: 1,
            hidden_dim: 3,
            gamma_init: 0.5,
        };
        let model = TwoStageGpn::new(&cfg, &mut rng).unwrap();
        let mut tape = Tape::new();
        let tracked = model.tracked(&mut tape);
        for ((_, a), (_, b)) in model.params().iter().zip(tracked.params().iter()) {
            assert_eq!(*a, *b);
            assert!(!a.requires_grad());
            assert!(b.requires_grad());
        }
    }

    #[test]
    fn scalar_feature_mode_rejects_wide_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = GraphEmbedConfig {
            layers: 1,
            input_dim: 5,
            hidden_dim: 3,
            gamma_init: 0.5,
        };
        assert!(MatrixTspGpn::new(&cfg, &mut rng).is_err());
        assert!(MatrixTspGpn::full_matrix(&cfg, &mut rng).is_ok());
    }
}
