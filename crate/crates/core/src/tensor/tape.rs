//! Operation tape and reverse-mode gradient accumulation.

use crate::error::{Error, Result};

use super::Tensor;

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) usize);

/// Saved operand: node handle (if tracked) plus a copy of the values the
/// backward pass may need.
#[derive(Clone, Debug)]
pub(crate) struct Arg {
    pub node: Option<NodeId>,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Arg {
    pub fn of(t: &Tensor) -> Arg {
        Arg {
            node: t.node,
            rows: t.rows,
            cols: t.cols,
            data: t.data.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Op {
    Leaf,
    Matmul(Arg, Arg),
    Add(Arg, Arg),
    Sub(Arg, Arg),
    Scale(Arg, f64),
    AddScalar(Arg),
    ScaleBy(Arg, Arg),
    ElemMul(Arg, Arg),
    Mean(Arg),
    Sum(Arg),
    /// Saves the output, since d tanh = 1 - y^2.
    Tanh(Arg, Vec<f64>),
    ConcatRows(Arg, Arg),
    AddRow(Arg, Arg),
    MaskedSoftmax {
        logits: Arg,
        probs: Vec<f64>,
        mask: Vec<bool>,
    },
    Select(Arg, usize, usize),
    Row(Arg, usize),
    SliceCols(Arg, usize, usize),
    Ln(Arg),
}

struct Record {
    op: Op,
    rows: usize,
    cols: usize,
}

/// Records primitive operations in execution order; [`Tape::backward`]
/// traverses them in exact reverse order, accumulating gradients additively
/// at fan-out. A tape is single-use: a second backward call is rejected.
#[derive(Default)]
pub struct Tape {
    records: Vec<Record>,
    consumed: bool,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    /// Registers a tracked copy of `t` as a differentiable leaf.
    pub fn var(&mut self, t: &Tensor) -> Tensor {
        let id = self.push(Op::Leaf, t.rows, t.cols);
        Tensor {
            rows: t.rows,
            cols: t.cols,
            data: t.data.clone(),
            node: Some(id),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    pub(crate) fn push(&mut self, op: Op, rows: usize, cols: usize) -> NodeId {
        let id = NodeId(self.records.len());
        self.records.push(Record { op, rows, cols });
        id
    }

    /// Gradients of a scalar loss with respect to every tracked leaf.
    pub fn backward(&mut self, loss: &Tensor) -> Result<Gradients> {
        let node = loss.node.ok_or(Error::NotScalar)?;
        if !loss.is_scalar() {
            return Err(Error::NotScalar);
        }
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        self.consumed = true;

        let mut grads: Vec<Option<Vec<f64>>> = (0..self.records.len()).map(|_| None).collect();
        grads[node.0] = Some(vec![1.0]);

        for id in (0..=node.0).rev() {
            let rec = &self.records[id];
            if matches!(rec.op, Op::Leaf) {
                continue; // leaf gradients stay in place for collection
            }
            let Some(g) = grads[id].take() else { continue };
            apply_vjp(&rec.op, &g, &mut grads);
        }

        let grads = grads
            .into_iter()
            .zip(&self.records)
            .map(|(g, rec)| match (&rec.op, g) {
                (Op::Leaf, Some(data)) => Some(Tensor {
                    rows: rec.rows,
                    cols: rec.cols,
                    data,
                    node: None,
                }),
                _ => None,
            })
            .collect();
        Ok(Gradients { grads })
    }
}

/// Leaf gradients produced by [`Tape::backward`]. Leaves that did not
/// influence the loss are absent.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    /// Gradient with respect to a tracked tensor.
    pub fn wrt(&self, t: &Tensor) -> Option<&Tensor> {
        t.node.and_then(|id| self.get(id))
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], arg: &Arg, contrib: impl Fn(usize) -> f64) {
    let Some(NodeId(p)) = arg.node else { return };
    let len = arg.rows * arg.cols;
    let slot = grads[p].get_or_insert_with(|| vec![0.0; len]);
    for (k, s) in slot.iter_mut().enumerate() {
        *s += contrib(k);
    }
}

fn apply_vjp(op: &Op, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
    match op {
        Op::Leaf => {}
        Op::Matmul(a, b) => {
            // out (m x n) = a (m x k) . b (k x n)
            let (m, k, n) = (a.rows, a.cols, b.cols);
            accumulate(grads, a, |idx| {
                let (i, j) = (idx / k, idx % k);
                (0..n).map(|t| g[i * n + t] * b.data[j * n + t]).sum()
            });
            accumulate(grads, b, |idx| {
                let (i, j) = (idx / n, idx % n);
                (0..m).map(|t| a.data[t * k + i] * g[t * n + j]).sum()
            });
        }
        Op::Add(a, b) => {
            accumulate(grads, a, |k| g[k]);
            accumulate(grads, b, |k| g[k]);
        }
        Op::Sub(a, b) => {
            accumulate(grads, a, |k| g[k]);
            accumulate(grads, b, |k| -g[k]);
        }
        Op::Scale(a, factor) => {
            accumulate(grads, a, |k| factor * g[k]);
        }
        Op::AddScalar(a) => {
            accumulate(grads, a, |k| g[k]);
        }
        Op::ScaleBy(a, s) => {
            let sv = s.data[0];
            accumulate(grads, a, |k| sv * g[k]);
            accumulate(grads, s, |_| {
                (0..a.data.len()).map(|k| g[k] * a.data[k]).sum()
            });
        }
        Op::ElemMul(a, b) => {
            accumulate(grads, a, |k| g[k] * b.data[k]);
            accumulate(grads, b, |k| g[k] * a.data[k]);
        }
        Op::Mean(a) => {
            let inv = 1.0 / a.data.len() as f64;
            accumulate(grads, a, |_| g[0] * inv);
        }
        Op::Sum(a) => {
            accumulate(grads, a, |_| g[0]);
        }
        Op::Tanh(a, y) => {
            accumulate(grads, a, |k| g[k] * (1.0 - y[k] * y[k]));
        }
        Op::ConcatRows(a, b) => {
            let split = a.rows * a.cols;
            accumulate(grads, a, |k| g[k]);
            accumulate(grads, b, |k| g[split + k]);
        }
        Op::AddRow(a, v) => {
            accumulate(grads, a, |k| g[k]);
            let cols = v.cols;
            accumulate(grads, v, |j| {
                (0..a.rows).map(|i| g[i * cols + j]).sum()
            });
        }
        Op::MaskedSoftmax { logits, probs, mask } => {
            let dot: f64 = g.iter().zip(probs).map(|(gi, pi)| gi * pi).sum();
            accumulate(grads, logits, |k| {
                if mask[k] {
                    0.0
                } else {
                    probs[k] * (g[k] - dot)
                }
            });
        }
        Op::Select(a, i, j) => {
            let target = i * a.cols + j;
            accumulate(grads, a, |k| if k == target { g[0] } else { 0.0 });
        }
        Op::Row(a, i) => {
            let cols = a.cols;
            let start = i * cols;
            accumulate(grads, a, |k| {
                if k >= start && k < start + cols {
                    g[k - start]
                } else {
                    0.0
                }
            });
        }
        Op::SliceCols(a, start, len) => {
            accumulate(grads, a, |k| {
                let (i, j) = (k / a.cols, k % a.cols);
                if j >= *start && j < start + len {
                    g[i * len + (j - start)]
                } else {
                    0.0
                }
            });
        }
        Op::Ln(a) => {
            accumulate(grads, a, |k| g[k] / a.data[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ops;
    use super::*;

    #[test]
    fn backward_of_squared_weights() {
        // loss = sum(w . w), w = [1, 2] -> grad [2, 4]
        let mut tape = Tape::new();
        let w = tape.var(&Tensor::column(vec![1.0, 2.0]));
        let sq = ops::elementwise_mul(&mut tape, &w, &w).unwrap();
        let loss = ops::sum(&mut tape, &sq).unwrap();
        assert_eq!(loss.item(), 5.0);
        let grads = tape.backward(&loss).unwrap();
        assert_eq!(grads.wrt(&w).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn constants_are_absent_from_the_gradient_map() {
        let mut tape = Tape::new();
        let w = tape.var(&Tensor::scalar(3.0));
        let c = Tensor::scalar(4.0);
        let prod = ops::elementwise_mul(&mut tape, &w, &c).unwrap();
        let grads = tape.backward(&prod).unwrap();
        assert_eq!(grads.wrt(&w).unwrap().item(), 4.0);
        assert!(grads.wrt(&c).is_none());
        assert!(!c.requires_grad());
    }

    #[test]
    fn fan_out_gradients_accumulate() {
        // loss = w + w -> dloss/dw = 2
        let mut tape = Tape::new();
        let w = tape.var(&Tensor::scalar(1.5));
        let loss = ops::add(&mut tape, &w, &w).unwrap();
        let grads = tape.backward(&loss).unwrap();
        assert_eq!(grads.wrt(&w).unwrap().item(), 2.0);
    }

    #[test]
    fn second_backward_is_rejected() {
        let mut tape = Tape::new();
        let w = tape.var(&Tensor::scalar(1.0));
        let loss = ops::scale(&mut tape, &w, 2.0).unwrap();
        tape.backward(&loss).unwrap();
        assert!(matches!(tape.backward(&loss), Err(Error::TapeConsumed)));
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut tape = Tape::new();
        let w = tape.var(&Tensor::column(vec![1.0, 2.0]));
        assert!(matches!(tape.backward(&w), Err(Error::NotScalar)));
        let untracked = Tensor::scalar(1.0);
        assert!(matches!(
            tape.backward(&untracked),
            Err(Error::NotScalar)
        ));
    }
}
