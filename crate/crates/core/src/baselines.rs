//! Non-learned reference solvers: greedy two-stage search, random
//! permutations, best-improvement pairwise-swap local search, and a
//! brute-force oracle for small instances.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dfp::{placement_increment, DfpView};
use crate::error::{Error, Result};
use crate::instance::{QapInstance, TspInstance};
use crate::solver::{evaluate_qap_cost, evaluate_tour, is_permutation};

/// A baseline's assignment with its re-evaluated cost and decode time.
#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub perm: Vec<usize>,
    pub cost: f64,
    pub elapsed: std::time::Duration,
    pub method: &'static str,
}

/// Deterministic analogue of the two-stage decoder: stage 1 picks the block
/// with the minimum representative, stage 2 walks factories in the same
/// cyclic order and picks the unused location minimizing the same raw
/// feature the decoder's policy sees (the placement cost increment). Ties
/// break to the lowest index everywhere.
pub fn greedy_two_stage(q: &QapInstance) -> Result<BaselineResult> {
    let n = q.n;
    let started = Instant::now();
    let view = DfpView::new(q);

    if n == 1 {
        let cost = evaluate_qap_cost(q, &[0])?;
        return Ok(BaselineResult {
            perm: vec![0],
            cost,
            elapsed: started.elapsed(),
            method: "greedy",
        });
    }

    // Stage 1: argmin over representatives in (factory, location) order,
    // which is exactly lowest-(a, b) lexicographic tie-breaking.
    let reps = view.representatives();
    let best = argmin(&reps, |_| true);
    let factory = best / n;
    let location = best % n;

    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut placed = vec![(factory, location)];
    perm[factory] = location;
    used[location] = true;

    // Stage 2: cyclic factory order, argmin over unused locations.
    for offset in 1..n {
        let k = (factory + offset) % n;
        let increments: Vec<f64> = (0..n)
            .map(|l| placement_increment(q, &placed, k, l))
            .collect();
        let l = argmin(&increments, |i| !used[i]);
        perm[k] = l;
        used[l] = true;
        placed.push((k, l));
    }

    let cost = evaluate_qap_cost(q, &perm)?;
    Ok(BaselineResult {
        perm,
        cost,
        elapsed: started.elapsed(),
        method: "greedy",
    })
}

fn argmin(values: &[f64], allowed: impl Fn(usize) -> bool) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        match best {
            Some((_, bv)) if v >= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best.expect("argmin over a non-empty candidate set").0
}

/// Uniform random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Random-assignment baseline for a QAP instance.
pub fn random_qap<R: Rng>(q: &QapInstance, rng: &mut R) -> Result<BaselineResult> {
    let started = Instant::now();
    let perm = random_permutation(q.n, rng);
    let cost = evaluate_qap_cost(q, &perm)?;
    Ok(BaselineResult {
        perm,
        cost,
        elapsed: started.elapsed(),
        method: "random",
    })
}

/// Random-tour baseline for a TSP instance.
pub fn random_tsp<R: Rng>(t: &TspInstance, rng: &mut R) -> Result<BaselineResult> {
    let started = Instant::now();
    let perm = random_permutation(t.n, rng);
    let cost = evaluate_tour(t, &perm)?;
    Ok(BaselineResult {
        perm,
        cost,
        elapsed: started.elapsed(),
        method: "random",
    })
}

/// Cost change from swapping the locations of factories `a` and `b`,
/// computed in O(n) without re-evaluating the objective.
pub(crate) fn swap_delta(q: &QapInstance, perm: &[usize], a: usize, b: usize) -> f64 {
    let (u, v) = (perm[a], perm[b]);
    let d = &q.dist;
    let f = &q.flow;
    let mut delta = 0.0;
    for (k, &w) in perm.iter().enumerate() {
        if k == a || k == b {
            continue;
        }
        delta += (f.get(a, k) - f.get(b, k)) * (d.get(v, w) - d.get(u, w));
        delta += (f.get(k, a) - f.get(k, b)) * (d.get(w, v) - d.get(w, u));
    }
    delta += (f.get(a, a) - f.get(b, b)) * (d.get(v, v) - d.get(u, u));
    delta += (f.get(a, b) - f.get(b, a)) * (d.get(v, u) - d.get(u, v));
    delta
}

/// Best-improvement pairwise-swap local search. Each sweep evaluates every
/// factory pair with the incremental delta and applies the best strictly
/// improving swap; stops at a local optimum or after `max_iters` sweeps.
pub fn two_opt_swap(q: &QapInstance, start: &[usize], max_iters: usize) -> Result<BaselineResult> {
    if !is_permutation(start, q.n) {
        return Err(Error::NotAPermutation(q.n));
    }
    let started = Instant::now();
    let mut perm = start.to_vec();
    for _ in 0..max_iters {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..q.n {
            for b in a + 1..q.n {
                let delta = swap_delta(q, &perm, a, b);
                if delta < -1e-12 && best.is_none_or(|(_, _, bd)| delta < bd) {
                    best = Some((a, b, delta));
                }
            }
        }
        match best {
            Some((a, b, _)) => perm.swap(a, b),
            None => break,
        }
    }
    let cost = evaluate_qap_cost(q, &perm)?;
    Ok(BaselineResult {
        perm,
        cost,
        elapsed: started.elapsed(),
        method: "two_opt",
    })
}

const BRUTE_FORCE_LIMIT: usize = 10;

fn check_brute_force_size(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(())
}

fn for_each_permutation(n: usize, f: &mut impl FnMut(&[usize])) {
    fn recurse(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            f(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            recurse(perm, k + 1, f);
            perm.swap(k, i);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    recurse(&mut perm, 0, f);
}

/// Exhaustive QAP optimum for n <= 10.
pub fn brute_force_qap(q: &QapInstance) -> Result<BaselineResult> {
    check_brute_force_size(q.n)?;
    let started = Instant::now();
    let mut best_perm: Vec<usize> = (0..q.n).collect();
    let mut best_cost = evaluate_qap_cost(q, &best_perm)?;
    let mut failed = false;
    for_each_permutation(q.n, &mut |perm| {
        match evaluate_qap_cost(q, perm) {
            Ok(cost) if cost < best_cost => {
                best_cost = cost;
                best_perm = perm.to_vec();
            }
            Ok(_) => {}
            Err(_) => failed = true,
        }
    });
    if failed {
        return Err(Error::NonFiniteValue("brute_force_qap"));
    }
    Ok(BaselineResult {
        perm: best_perm,
        cost: best_cost,
        elapsed: started.elapsed(),
        method: "brute_force",
    })
}

/// Exhaustive TSP optimum for n <= 10. The first city is pinned (tour cost
/// is rotation-invariant), so (n-1)! tours are evaluated.
pub fn brute_force_tsp(t: &TspInstance) -> Result<BaselineResult> {
    check_brute_force_size(t.n)?;
    let started = Instant::now();
    if t.n == 1 {
        let cost = evaluate_tour(t, &[0])?;
        return Ok(BaselineResult {
            perm: vec![0],
            cost,
            elapsed: started.elapsed(),
            method: "brute_force",
        });
    }
    let mut best_tour: Vec<usize> = (0..t.n).collect();
    let mut best_cost = evaluate_tour(t, &best_tour)?;
    let mut failed = false;
    for_each_permutation(t.n - 1, &mut |rest| {
        let mut tour = Vec::with_capacity(t.n);
        tour.push(0);
        tour.extend(rest.iter().map(|&c| c + 1));
        match evaluate_tour(t, &tour) {
            Ok(cost) if cost < best_cost => {
                best_cost = cost;
                best_tour = tour;
            }
            Ok(_) => {}
            Err(_) => failed = true,
        }
    });
    if failed {
        return Err(Error::NonFiniteValue("brute_force_tsp"));
    }
    Ok(BaselineResult {
        perm: best_tour,
        cost: best_cost,
        elapsed: started.elapsed(),
        method: "brute_force",
    })
}
