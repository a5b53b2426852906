//! QAPLIB text format: the order `n` followed by two n-by-n matrices.
//!
//! Files list matrix A then matrix B with objective
//! `sum a[i][j] * b[perm[i]][perm[j]]`; A maps to flow and B to distance so
//! the crate's cost function reproduces QAPLIB best-known values.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

use super::QapInstance;

/// Parses a QAPLIB file. The instance name is left empty; callers usually
/// fill it from the file stem via [`QapInstance::with_name`].
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let mut tokens = text.split_whitespace();
    let first = tokens
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty QAPLIB file".into()))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("problem order '{first}'")))?;
    if n == 0 {
        return Err(Error::MalformedHeader("problem order must be positive".into()));
    }

    let mut values = Vec::with_capacity(2 * n * n);
    for token in tokens {
        let v: f64 = token
            .parse()
            .map_err(|_| Error::MalformedNumber(format!("matrix entry '{token}'")))?;
        if !v.is_finite() {
            return Err(Error::MalformedNumber(format!(
                "matrix entry '{token}' is not finite"
            )));
        }
        values.push(v);
    }
    if values.len() != 2 * n * n {
        return Err(Error::DimensionMismatch(format!(
            "expected {} matrix entries for n = {n}, got {}",
            2 * n * n,
            values.len()
        )));
    }

    let flow = SquareMatrix::from_flat(n, values[..n * n].to_vec())?;
    let dist = SquareMatrix::from_flat(n, values[n * n..].to_vec())?;
    QapInstance::new(String::new(), dist, flow)
}

/// Serializes an instance in QAPLIB layout (flow matrix first). Entries use
/// the shortest round-trip decimal form.
pub fn serialize_qaplib(q: &QapInstance) -> String {
    let mut out = format!("{}\n\n", q.n);
    for m in [&q.flow, &q.dist] {
        for i in 0..q.n {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
