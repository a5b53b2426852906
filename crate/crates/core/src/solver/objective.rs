//! Objective evaluation and the benchmark gap metric.

use crate::error::{Error, Result};
use crate::instance::{QapInstance, TspInstance};

/// True iff `perm` is a bijection on `0..n`.
pub fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// QAP cost of assigning factory `i` to location `perm[i]`:
/// `sum_{i,j} dist[perm[i]][perm[j]] * flow[i][j]`.
pub fn evaluate_qap_cost(q: &QapInstance, perm: &[usize]) -> Result<f64> {
    if !is_permutation(perm, q.n) {
        return Err(Error::NotAPermutation(q.n));
    }
    let mut cost = 0.0;
    for i in 0..q.n {
        let drow = q.dist.row(perm[i]);
        let frow = q.flow.row(i);
        for j in 0..q.n {
            cost += drow[perm[j]] * frow[j];
        }
    }
    Ok(cost)
}

/// Cyclic tour length `sum_i dist[tour[i]][tour[i+1]]`, closing edge included.
pub fn evaluate_tour(t: &TspInstance, tour: &[usize]) -> Result<f64> {
    if !is_permutation(tour, t.n) {
        return Err(Error::NotAPermutation(t.n));
    }
    let mut len = 0.0;
    for i in 0..t.n {
        len += t.dist.get(tour[i], tour[(i + 1) % t.n]);
    }
    Ok(len)
}

/// Percentage excess over the best-known cost: `100 (cost - best) / best`.
pub fn gap_percent(cost: f64, best_known: f64) -> Result<f64> {
    if best_known <= 0.0 || best_known.is_nan() {
        return Err(Error::NonPositiveBest(best_known));
    }
    Ok(100.0 * (cost - best_known) / best_known)
}
