//! Problem instances: TSPLIB / QAPLIB parsing, synthetic generators, and
//! the TSP-to-QAP reduction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

mod qaplib;
mod tsplib;

pub use qaplib::{parse_qaplib, serialize_qaplib};
pub use tsplib::{parse_tsplib, serialize_tsplib};

/// Where a TSP distance matrix came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TspSource {
    ExplicitMatrix,
    EuclideanCoords,
}

/// A matrix-input TSP instance. The tour objective is the cyclic sum of
/// `dist[tour[k]][tour[k+1]]` including the closing edge.
#[derive(Clone, Debug)]
pub struct TspInstance {
    pub name: String,
    pub n: usize,
    pub dist: SquareMatrix,
    pub source: TspSource,
    pub coords: Option<Vec<(f64, f64)>>,
}

impl TspInstance {
    /// Builds an explicit-matrix instance. The diagonal is forced to zero.
    pub fn from_matrix(name: impl Into<String>, mut dist: SquareMatrix) -> Result<Self> {
        dist.validate_nonnegative("distance")?;
        dist.zero_diagonal();
        Ok(TspInstance {
            name: name.into(),
            n: dist.n(),
            dist,
            source: TspSource::ExplicitMatrix,
            coords: None,
        })
    }

    /// Builds a Euclidean instance; distances are exact (no integer rounding).
    pub fn from_coords(name: impl Into<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        let n = coords.len();
        let mut dist = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                dist.set(i, j, (dx * dx + dy * dy).sqrt());
            }
        }
        dist.validate_nonnegative("distance")?;
        Ok(TspInstance {
            name: name.into(),
            n,
            dist,
            source: TspSource::EuclideanCoords,
            coords: Some(coords),
        })
    }
}

/// A QAP instance: assign factories to locations minimizing the sum of
/// `dist[perm[i]][perm[j]] * flow[i][j]` over all ordered pairs.
#[derive(Clone, Debug)]
pub struct QapInstance {
    pub name: String,
    pub n: usize,
    pub dist: SquareMatrix,
    pub flow: SquareMatrix,
}

impl QapInstance {
    pub fn new(name: impl Into<String>, dist: SquareMatrix, flow: SquareMatrix) -> Result<Self> {
        if dist.n() != flow.n() {
            return Err(Error::DimensionMismatch(format!(
                "distance is {}x{0} but flow is {}x{1}",
                dist.n(),
                flow.n()
            )));
        }
        dist.validate_nonnegative("distance")?;
        flow.validate_nonnegative("flow")?;
        Ok(QapInstance {
            name: name.into(),
            n: dist.n(),
            dist,
            flow,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Encodes a TSP instance as a QAP whose flow matrix is the cyclic-successor
/// pattern: `flow[i][j] = 1` iff `j` follows `i` in the cycle `0,1,..,n-1,0`.
/// A QAP assignment of factory k to location `perm[k]` then costs exactly the
/// tour that visits `perm[0], perm[1], ...` in order.
pub fn tsp_to_qap(t: &TspInstance) -> QapInstance {
    let n = t.n;
    let mut flow = SquareMatrix::zeros(n);
    for i in 0..n {
        flow.set(i, (i + 1) % n, 1.0);
    }
    QapInstance {
        name: t.name.clone(),
        n,
        dist: t.dist.clone(),
        flow,
    }
}

/// Configuration for the synthetic-instance generators. Identical configs
/// always yield identical instances.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    /// Probability that an off-diagonal entry is zeroed.
    pub zero_prob: f64,
    /// Mirror the distance matrix across the diagonal.
    pub symmetric: bool,
    pub value_range: (f64, f64),
}

impl GeneratorConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            seed,
            zero_prob: 0.0,
            symmetric: true,
            value_range: (0.0, 1.0),
        }
    }

    pub fn with_zero_prob(mut self, p: f64) -> Self {
        self.zero_prob = p;
        self
    }

    pub fn with_range(mut self, low: f64, high: f64) -> Self {
        self.value_range = (low, high);
        self
    }

    pub fn asymmetric(mut self) -> Self {
        self.symmetric = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::DimensionMismatch("generator needs n >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.zero_prob) {
            return Err(Error::MalformedNumber(format!(
                "zero_prob must lie in [0, 1), got {}",
                self.zero_prob
            )));
        }
        let (low, high) = self.value_range;
        if !(low.is_finite() && high.is_finite() && low < high && low >= 0.0) {
            return Err(Error::MalformedNumber(format!(
                "value range must satisfy 0 <= low < high, got ({low}, {high})"
            )));
        }
        Ok(())
    }
}

fn fill_matrix(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig, symmetric: bool) -> SquareMatrix {
    let n = cfg.n;
    let (low, high) = cfg.value_range;
    let mut m = SquareMatrix::zeros(n);
    if symmetric {
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(low..high);
                let keep = rng.random::<f64>() >= cfg.zero_prob;
                let v = if keep { v } else { 0.0 };
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = rng.random_range(low..high);
                let keep = rng.random::<f64>() >= cfg.zero_prob;
                m.set(i, j, if keep { v } else { 0.0 });
            }
        }
    }
    m
}

/// Synthetic QAP: distance symmetric (per config) with zero diagonal, flow
/// asymmetric with zero diagonal, entries uniform over `value_range` and
/// independently zeroed with `zero_prob`.
pub fn generate_qap(cfg: &GeneratorConfig) -> Result<QapInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dist = fill_matrix(&mut rng, cfg, cfg.symmetric);
    let flow = fill_matrix(&mut rng, cfg, false);
    Ok(QapInstance {
        name: format!("synth-qap-n{}-s{}", cfg.n, cfg.seed),
        n: cfg.n,
        dist,
        flow,
    })
}

/// Synthetic matrix-input TSP with the same entry distribution as
/// [`generate_qap`]'s distance matrix.
pub fn generate_tsp_matrix(cfg: &GeneratorConfig) -> Result<TspInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dist = fill_matrix(&mut rng, cfg, cfg.symmetric);
    Ok(TspInstance {
        name: format!("synth-tsp-n{}-s{}", cfg.n, cfg.seed),
        n: cfg.n,
        dist,
        source: TspSource::ExplicitMatrix,
        coords: None,
    })
}
