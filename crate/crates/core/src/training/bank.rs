//! Two models specialized by input sparsity, routed by the DFP zero ratio.

use crate::dfp::DfpView;
use crate::error::Result;
use crate::instance::QapInstance;
use crate::solver::TwoStageGpn;

use super::{sparse_run_seed, train_two_stage, CurvePoint, TrainConfig};

/// The dense model trains on zero_prob = 0 instances, the sparse model on
/// `sparse_zero_prob`; inference routes on the instance's zero ratio.
#[derive(Clone, Debug)]
pub struct ModelBank {
    pub dense_model: TwoStageGpn,
    pub sparse_model: TwoStageGpn,
    pub routing_threshold: f64,
}

impl ModelBank {
    pub fn new(dense_model: TwoStageGpn, sparse_model: TwoStageGpn) -> Self {
        ModelBank {
            dense_model,
            sparse_model,
            routing_threshold: 0.5,
        }
    }
}

/// Trains both bank members; returns the bank and each training curve.
pub fn train_bank(cfg: &TrainConfig) -> Result<(ModelBank, Vec<CurvePoint>, Vec<CurvePoint>)> {
    cfg.validate()?;
    let dense_cfg = TrainConfig {
        zero_prob: 0.0,
        ..cfg.clone()
    };
    let (dense_model, dense_curve) = train_two_stage(&dense_cfg)?;
    let sparse_cfg = TrainConfig {
        zero_prob: cfg.sparse_zero_prob,
        seed: sparse_run_seed(cfg.seed),
        ..cfg.clone()
    };
    let (sparse_model, sparse_curve) = train_two_stage(&sparse_cfg)?;
    Ok((
        ModelBank::new(dense_model, sparse_model),
        dense_curve,
        sparse_curve,
    ))
}

/// Picks the sparse model iff the instance's zero ratio reaches the
/// threshold (the boundary itself routes sparse).
pub fn route<'b>(bank: &'b ModelBank, q: &QapInstance) -> &'b TwoStageGpn {
    if DfpView::new(q).zero_ratio() >= bank.routing_threshold {
        &bank.sparse_model
    } else {
        &bank.dense_model
    }
}
