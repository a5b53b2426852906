//! Dense rank-2 tensors with reverse-mode automatic differentiation.
//!
//! A [`Tensor`] is a plain value; it participates in gradient computation
//! only after being registered on a [`Tape`] via [`Tape::var`]. Operations
//! in [`ops`] record themselves on the tape whenever any input is tracked,
//! and [`Tape::backward`] replays the records in reverse to accumulate
//! gradients for every tracked leaf.

use rand::Rng;

use crate::error::{Error, Result};

pub mod adam;
pub mod checkpoint;
pub mod ops;
mod tape;

pub use adam::AdamState;
pub use tape::{Gradients, NodeId, Tape};

/// A dense matrix of `f64` (scalars are 1x1, vectors are n x 1 or 1 x n).
#[derive(Clone, Debug)]
pub struct Tensor {
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) data: Vec<f64>,
    pub(crate) node: Option<NodeId>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "tensor dims must be positive");
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            node: None,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::shape(
                "from_vec",
                format!("{rows}x{cols} with {} values", data.len()),
            ));
        }
        Ok(Tensor {
            rows,
            cols,
            data,
            node: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::shape("from_rows", "empty input".to_string()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::shape("from_rows", "ragged rows".to_string()));
            }
            data.extend_from_slice(r);
        }
        Ok(Tensor {
            rows: rows.len(),
            cols,
            data,
            node: None,
        })
    }

    pub fn scalar(x: f64) -> Self {
        Tensor {
            rows: 1,
            cols: 1,
            data: vec![x],
            node: None,
        }
    }

    /// Column vector (n x 1).
    pub fn column(values: Vec<f64>) -> Self {
        assert!(!values.is_empty());
        Tensor {
            rows: values.len(),
            cols: 1,
            data: values,
            node: None,
        }
    }

    /// Row vector (1 x n).
    pub fn row_vec(values: Vec<f64>) -> Self {
        assert!(!values.is_empty());
        Tensor {
            rows: 1,
            cols: values.len(),
            data: values,
            node: None,
        }
    }

    /// Entries drawn uniformly from `(-bound, bound)`.
    pub fn uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: f64) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Tensor {
            rows,
            cols,
            data,
            node: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dims are always positive
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Value of a 1x1 tensor.
    ///
    /// Panics if the tensor is not scalar.
    pub fn item(&self) -> f64 {
        assert!(
            self.rows == 1 && self.cols == 1,
            "item() on a {}x{} tensor",
            self.rows,
            self.cols
        );
        self.data[0]
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    /// Whether this tensor is tracked on a tape.
    pub fn requires_grad(&self) -> bool {
        self.node.is_some()
    }

    pub fn node_id(&self) -> Option<NodeId> {
        self.node
    }

    /// Copy of the values without tape tracking.
    pub fn detach(&self) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
            node: None,
        }
    }

    pub(crate) fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Equality on shape and values; tape tracking is ignored.
impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_check_shapes() {
        assert!(Tensor::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let t = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(t.get(1, 0), 3.0);
        assert_eq!(t.shape(), (2, 2));
    }

    #[test]
    fn equality_ignores_tracking() {
        let a = Tensor::scalar(2.0);
        let mut tape = Tape::new();
        let b = tape.var(&a);
        assert!(b.requires_grad());
        assert_eq!(a, b);
    }
}
