//! Dense square matrices of `f64`, row-major.
//!
//! Problem data (distance and flow matrices) is stored in this plain type;
//! gradient-carrying math lives in [`crate::tensor`].

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn count_zeros(&self) -> usize {
        self.data.iter().filter(|&&x| x == 0.0).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn zero_diagonal(&mut self) {
        for i in 0..self.n {
            self.set(i, i, 0.0);
        }
    }

    /// All entries finite and non-negative.
    pub fn validate_nonnegative(&self, what: &str) -> Result<()> {
        for (k, &x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::MalformedNumber(format!(
                    "{what} entry ({}, {}) is not finite",
                    k / self.n,
                    k % self.n
                )));
            }
            if x < 0.0 {
                return Err(Error::MalformedNumber(format!(
                    "{what} entry ({}, {}) is negative: {x}",
                    k / self.n,
                    k % self.n
                )));
            }
        }
        Ok(())
    }
}
