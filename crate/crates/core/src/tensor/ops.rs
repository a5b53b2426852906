//! Differentiable primitive operations.
//!
//! Every op validates shapes, computes the forward value, rejects non-finite
//! results, and records itself on the tape when any input is tracked.

use crate::error::{Error, Result};

use super::tape::{Arg, Op};
use super::{Tape, Tensor};

fn finish(
    tape: &mut Tape,
    op_name: &'static str,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    tracked: bool,
    op: impl FnOnce() -> Op,
) -> Result<Tensor> {
    let mut out = Tensor {
        rows,
        cols,
        data,
        node: None,
    };
    if !out.all_finite() {
        return Err(Error::NonFiniteValue(op_name));
    }
    if tracked {
        out.node = Some(tape.push(op(), rows, cols));
    }
    Ok(out)
}

/// Matrix product `a . b`.
pub fn matmul(tape: &mut Tape, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "matmul",
            format!("{}x{} . {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        for t in 0..k {
            let av = a.data[i * k + t];
            if av == 0.0 {
                continue;
            }
            let brow = &b.data[t * n..(t + 1) * n];
            let orow = &mut data[i * n..(i + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    let tracked = a.node.is_some() || b.node.is_some();
    finish(tape, "matmul", m, n, data, tracked, || {
        Op::Matmul(Arg::of(a), Arg::of(b))
    })
}

fn zip_shapes(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(
            op,
            format!("{}x{} vs {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    Ok(())
}

pub fn add(tape: &mut Tape, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_shapes("add", a, b)?;
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
    let tracked = a.node.is_some() || b.node.is_some();
    finish(tape, "add", a.rows, a.cols, data, tracked, || {
        Op::Add(Arg::of(a), Arg::of(b))
    })
}

pub fn sub(tape: &mut Tape, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_shapes("sub", a, b)?;
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect();
    let tracked = a.node.is_some() || b.node.is_some();
    finish(tape, "sub", a.rows, a.cols, data, tracked, || {
        Op::Sub(Arg::of(a), Arg::of(b))
    })
}

/// Multiplication by a compile-time constant.
pub fn scale(tape: &mut Tape, a: &Tensor, factor: f64) -> Result<Tensor> {
    let data = a.data.iter().map(|x| x * factor).collect();
    finish(tape, "scale", a.rows, a.cols, data, a.node.is_some(), || {
        Op::Scale(Arg::of(a), factor)
    })
}

/// Elementwise addition of a constant.
pub fn add_scalar(tape: &mut Tape, a: &Tensor, value: f64) -> Result<Tensor> {
    let data = a.data.iter().map(|x| x + value).collect();
    finish(tape, "add_scalar", a.rows, a.cols, data, a.node.is_some(), || {
        Op::AddScalar(Arg::of(a))
    })
}

/// Multiplication by a 1x1 tensor (e.g. a learnable gate).
pub fn scale_by(tape: &mut Tape, a: &Tensor, s: &Tensor) -> Result<Tensor> {
    if !s.is_scalar() {
        return Err(Error::shape(
            "scale_by",
            format!("scale factor is {}x{}", s.rows, s.cols),
        ));
    }
    let sv = s.data[0];
    let data = a.data.iter().map(|x| x * sv).collect();
    let tracked = a.node.is_some() || s.node.is_some();
    finish(tape, "scale_by", a.rows, a.cols, data, tracked, || {
        Op::ScaleBy(Arg::of(a), Arg::of(s))
    })
}

pub fn elementwise_mul(tape: &mut Tape, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_shapes("elementwise_mul", a, b)?;
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
    let tracked = a.node.is_some() || b.node.is_some();
    finish(tape, "elementwise_mul", a.rows, a.cols, data, tracked, || {
        Op::ElemMul(Arg::of(a), Arg::of(b))
    })
}

/// Mean of all entries (1x1 output).
pub fn mean(tape: &mut Tape, a: &Tensor) -> Result<Tensor> {
    let m = a.data.iter().sum::<f64>() / a.data.len() as f64;
    finish(tape, "mean", 1, 1, vec![m], a.node.is_some(), || {
        Op::Mean(Arg::of(a))
    })
}

/// Sum of all entries (1x1 output).
pub fn sum(tape: &mut Tape, a: &Tensor) -> Result<Tensor> {
    let s = a.data.iter().sum::<f64>();
    finish(tape, "sum", 1, 1, vec![s], a.node.is_some(), || {
        Op::Sum(Arg::of(a))
    })
}

pub fn tanh(tape: &mut Tape, a: &Tensor) -> Result<Tensor> {
    let data: Vec<f64> = a.data.iter().map(|x| x.tanh()).collect();
    let saved = data.clone();
    finish(tape, "tanh", a.rows, a.cols, data, a.node.is_some(), || {
        Op::Tanh(Arg::of(a), saved)
    })
}

/// Natural log, elementwise. Non-positive inputs produce a numeric error.
pub fn ln(tape: &mut Tape, a: &Tensor) -> Result<Tensor> {
    let data = a.data.iter().map(|x| x.ln()).collect();
    finish(tape, "ln", a.rows, a.cols, data, a.node.is_some(), || {
        Op::Ln(Arg::of(a))
    })
}

/// Stacks `a` on top of `b` (column counts must match).
pub fn concat_rows(tape: &mut Tape, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.cols != b.cols {
        return Err(Error::shape(
            "concat_rows",
            format!("{} vs {} columns", a.cols, b.cols),
        ));
    }
    let mut data = Vec::with_capacity((a.rows + b.rows) * a.cols);
    data.extend_from_slice(&a.data);
    data.extend_from_slice(&b.data);
    let tracked = a.node.is_some() || b.node.is_some();
    finish(tape, "concat_rows", a.rows + b.rows, a.cols, data, tracked, || {
        Op::ConcatRows(Arg::of(a), Arg::of(b))
    })
}

/// Adds a row vector to every row of a matrix.
pub fn add_row(tape: &mut Tape, a: &Tensor, v: &Tensor) -> Result<Tensor> {
    if v.rows != 1 || v.cols != a.cols {
        return Err(Error::shape(
            "add_row",
            format!("matrix {}x{} + row {}x{}", a.rows, a.cols, v.rows, v.cols),
        ));
    }
    let mut data = a.data.clone();
    for i in 0..a.rows {
        for j in 0..a.cols {
            data[i * a.cols + j] += v.data[j];
        }
    }
    let tracked = a.node.is_some() || v.node.is_some();
    finish(tape, "add_row", a.rows, a.cols, data, tracked, || {
        Op::AddRow(Arg::of(a), Arg::of(v))
    })
}

/// Softmax over the unmasked entries of a column vector. Masked entries
/// (`mask[i] == true`) receive probability exactly zero; the rest are
/// stabilized by subtracting the unmasked maximum.
pub fn masked_softmax(tape: &mut Tape, logits: &Tensor, mask: &[bool]) -> Result<Tensor> {
    if logits.cols != 1 {
        return Err(Error::shape(
            "masked_softmax",
            format!("expected a column vector, got {}x{}", logits.rows, logits.cols),
        ));
    }
    if mask.len() != logits.rows {
        return Err(Error::shape(
            "masked_softmax",
            format!("{} logits vs {} mask entries", logits.rows, mask.len()),
        ));
    }
    let max = logits
        .data
        .iter()
        .zip(mask)
        .filter(|(_, &m)| !m)
        .map(|(&x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllMasked);
    }
    let mut data: Vec<f64> = logits
        .data
        .iter()
        .zip(mask)
        .map(|(&x, &m)| if m { 0.0 } else { (x - max).exp() })
        .collect();
    let z: f64 = data.iter().sum();
    for p in &mut data {
        *p /= z;
    }
    let saved = data.clone();
    let mask_saved = mask.to_vec();
    finish(
        tape,
        "masked_softmax",
        logits.rows,
        1,
        data,
        logits.node.is_some(),
        || Op::MaskedSoftmax {
            logits: Arg::of(logits),
            probs: saved,
            mask: mask_saved,
        },
    )
}

/// Extracts a single entry as a 1x1 tensor.
pub fn select(tape: &mut Tape, a: &Tensor, i: usize, j: usize) -> Result<Tensor> {
    if i >= a.rows || j >= a.cols {
        return Err(Error::IndexOutOfRange(format!(
            "select ({i}, {j}) from a {}x{} tensor",
            a.rows, a.cols
        )));
    }
    let v = a.get(i, j);
    finish(tape, "select", 1, 1, vec![v], a.node.is_some(), || {
        Op::Select(Arg::of(a), i, j)
    })
}

/// Extracts row `i` as a 1 x cols tensor.
pub fn row(tape: &mut Tape, a: &Tensor, i: usize) -> Result<Tensor> {
    if i >= a.rows {
        return Err(Error::IndexOutOfRange(format!(
            "row {i} of a {}x{} tensor",
            a.rows, a.cols
        )));
    }
    let data = a.data[i * a.cols..(i + 1) * a.cols].to_vec();
    finish(tape, "row", 1, a.cols, data, a.node.is_some(), || {
        Op::Row(Arg::of(a), i)
    })
}

/// Extracts columns `start..start + len`.
pub fn slice_cols(tape: &mut Tape, a: &Tensor, start: usize, len: usize) -> Result<Tensor> {
    if len == 0 || start + len > a.cols {
        return Err(Error::IndexOutOfRange(format!(
            "columns {start}..{} of a {}x{} tensor",
            start + len,
            a.rows,
            a.cols
        )));
    }
    let mut data = Vec::with_capacity(a.rows * len);
    for i in 0..a.rows {
        data.extend_from_slice(&a.data[i * a.cols + start..i * a.cols + start + len]);
    }
    finish(tape, "slice_cols", a.rows, len, data, a.node.is_some(), || {
        Op::SliceCols(Arg::of(a), start, len)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: &[Vec<f64>]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_identity_is_identity() {
        let mut tape = Tape::new();
        let eye = t(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let m = t(&[vec![3.0, -1.0], vec![2.5, 7.0]]);
        let out = matmul(&mut tape, &eye, &m).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn matmul_hand_arithmetic() {
        let mut tape = Tape::new();
        let a = t(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = t(&[vec![5.0], vec![6.0]]);
        let out = matmul(&mut tape, &a, &b).unwrap();
        assert_eq!(out.data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_shape_mismatch() {
        let mut tape = Tape::new();
        let a = Tensor::zeros(2, 3);
        let b = Tensor::zeros(2, 3);
        assert!(matches!(
            matmul(&mut tape, &a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn tanh_of_zero_is_zero() {
        let mut tape = Tape::new();
        let out = tanh(&mut tape, &Tensor::scalar(0.0)).unwrap();
        assert_eq!(out.item(), 0.0);
    }

    #[test]
    fn non_finite_results_error_out() {
        let mut tape = Tape::new();
        let big = Tensor::scalar(f64::MAX);
        assert!(matches!(
            add(&mut tape, &big, &big),
            Err(Error::NonFiniteValue(_))
        ));
        assert!(matches!(
            ln(&mut tape, &Tensor::scalar(0.0)),
            Err(Error::NonFiniteValue(_))
        ));
    }

    #[test]
    fn masked_softmax_uniform_without_mask() {
        let mut tape = Tape::new();
        let logits = Tensor::column(vec![0.0, 0.0, 0.0]);
        let p = masked_softmax(&mut tape, &logits, &[false, false, false]).unwrap();
        for &x in p.data() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn masked_softmax_single_survivor() {
        let mut tape = Tape::new();
        let logits = Tensor::column(vec![5.0, 1.0]);
        let p = masked_softmax(&mut tape, &logits, &[true, false]).unwrap();
        assert_eq!(p.data(), &[0.0, 1.0]);
    }

    #[test]
    fn masked_softmax_probabilities_sum_to_one() {
        let mut tape = Tape::new();
        let logits = Tensor::column(vec![3.0, -800.0, 2.0, 900.0]);
        let mask = [false, false, true, false];
        let p = masked_softmax(&mut tape, &logits, &mask).unwrap();
        assert_eq!(p.data()[2], 0.0);
        let total: f64 = p.data().iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert!(p.data().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn masked_softmax_all_masked_is_an_error() {
        let mut tape = Tape::new();
        let logits = Tensor::column(vec![1.0, 2.0]);
        assert!(matches!(
            masked_softmax(&mut tape, &logits, &[true, true]),
            Err(Error::AllMasked)
        ));
    }

    #[test]
    fn slice_and_concat_round_trip() {
        let mut tape = Tape::new();
        let a = t(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let left = slice_cols(&mut tape, &a, 0, 2).unwrap();
        assert_eq!(left.data(), &[1.0, 2.0, 4.0, 5.0]);
        let top = t(&[vec![1.0, 2.0]]);
        let bottom = t(&[vec![3.0, 4.0]]);
        let stacked = concat_rows(&mut tape, &top, &bottom).unwrap();
        assert_eq!(stacked.shape(), (2, 2));
        assert_eq!(stacked.data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn untracked_inputs_record_nothing() {
        let mut tape = Tape::new();
        let a = Tensor::scalar(1.0);
        let b = Tensor::scalar(2.0);
        let out = add(&mut tape, &a, &b).unwrap();
        assert!(!out.requires_grad());
        assert!(tape.is_empty());
    }
}
