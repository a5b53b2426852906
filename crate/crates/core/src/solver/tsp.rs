//! Matrix-input TSP decoding.
//!
//! The tour starts at city 0. Each step embeds per-node features derived
//! from the current city's distance row, masks visited cities, and selects
//! the next city through the pointer policy. In the with-LSTM arm the cell
//! consumes the current city's embedding and its hidden state becomes the
//! attention query.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gpn::{graph_embed, lstm_step, pointer_logits, policy_select, SelectMode};
use crate::instance::TspInstance;
use crate::tensor::{ops, Tape, Tensor};

use super::{
    evaluate_tour, min_max_normalize, DecodeMode, FeatureMode, MatrixTspGpn, ReplayCursor,
    Solution,
};

/// Decodes a tour without gradient tracking.
pub fn solve_matrix_tsp<R: Rng>(
    model: &MatrixTspGpn,
    t: &TspInstance,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<Solution> {
    let mut tape = Tape::new();
    let (solution, _) = solve_matrix_tsp_traced(model, &mut tape, t, mode, rng)?;
    Ok(solution)
}

/// Decodes a tour on an explicit tape and also returns the accumulated
/// log-probability as a (possibly tracked) scalar tensor.
pub fn solve_matrix_tsp_traced<R: Rng>(
    model: &MatrixTspGpn,
    tape: &mut Tape,
    t: &TspInstance,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<(Solution, Tensor)> {
    let n = t.n;
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "tsp decode needs n >= 2, got {n}"
        )));
    }
    if model.feature_mode == FeatureMode::FullMatrix && model.input_dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "full-matrix features need encoder input width {n}, model has {}",
            model.input_dim()
        )));
    }
    let mut replay = match &mode {
        DecodeMode::Replay(actions) => Some(ReplayCursor::new(actions, n - 1)?),
        _ => None,
    };

    let started = Instant::now();
    let full_features = match model.feature_mode {
        FeatureMode::FullMatrix => {
            let rows: Vec<Vec<f64>> = (0..n).map(|j| min_max_normalize(t.dist.row(j))).collect();
            Some(Tensor::from_rows(&rows)?)
        }
        FeatureMode::CurrentRow => None,
    };

    let mut visited = vec![false; n];
    visited[0] = true;
    let mut tour = vec![0usize];
    let mut log_prob_sum = Tensor::scalar(0.0);
    let mut state = model
        .lstm
        .as_ref()
        .map(|_| (Tensor::zeros(1, model.hidden), Tensor::zeros(1, model.hidden)));

    for _ in 0..n - 1 {
        let current = *tour.last().expect("tour starts non-empty");
        let x0 = match &full_features {
            Some(x) => x.clone(),
            None => Tensor::column(min_max_normalize(t.dist.row(current))),
        };
        let refs = graph_embed(tape, &model.encoder, &x0)?;

        let query = if let (Some(cell), Some((h, c))) = (&model.lstm, &mut state) {
            let current_embedding = ops::row(tape, &refs, current)?;
            let (h_next, c_next) = lstm_step(tape, cell, &current_embedding, h, c)?;
            *h = h_next;
            *c = c_next;
            Some(h.clone())
        } else {
            None
        };

        let logits = pointer_logits(tape, &model.decoder, &refs, query.as_ref(), &visited)?;
        let select = match (&mode, &mut replay) {
            (DecodeMode::Greedy, _) => SelectMode::Greedy,
            (DecodeMode::Sample, _) => SelectMode::Sample,
            (DecodeMode::Replay(_), Some(cursor)) => SelectMode::Forced(cursor.next()),
            (DecodeMode::Replay(_), None) => unreachable!(),
        };
        let step = policy_select(tape, &logits, &visited, select, rng)?;
        visited[step.chosen] = true;
        tour.push(step.chosen);
        log_prob_sum = ops::add(tape, &log_prob_sum, &step.log_prob)?;
    }

    let cost = evaluate_tour(t, &tour)?;
    Ok((
        Solution {
            perm: tour,
            cost,
            log_prob_sum: log_prob_sum.item(),
            elapsed: started.elapsed(),
        },
        log_prob_sum,
    ))
}
