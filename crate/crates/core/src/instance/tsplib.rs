//! TSPLIB text format: keyword header, NODE_COORD_SECTION or
//! EDGE_WEIGHT_SECTION, optional EOF marker.
//!
//! Supported: `EDGE_WEIGHT_TYPE` EUC_2D and EXPLICIT with formats
//! FULL_MATRIX, UPPER_ROW, LOWER_ROW, UPPER_DIAG_ROW, LOWER_DIAG_ROW.
//! Triangular formats are mirrored to a full symmetric matrix.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

use super::{TspInstance, TspSource};

#[derive(Clone, Copy, PartialEq, Eq)]
enum WeightFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

impl WeightFormat {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "FULL_MATRIX" => Ok(WeightFormat::FullMatrix),
            "UPPER_ROW" => Ok(WeightFormat::UpperRow),
            "LOWER_ROW" => Ok(WeightFormat::LowerRow),
            "UPPER_DIAG_ROW" => Ok(WeightFormat::UpperDiagRow),
            "LOWER_DIAG_ROW" => Ok(WeightFormat::LowerDiagRow),
            other => Err(Error::UnknownFormat(format!(
                "EDGE_WEIGHT_FORMAT {other}"
            ))),
        }
    }

    fn entry_count(&self, n: usize) -> usize {
        match self {
            WeightFormat::FullMatrix => n * n,
            WeightFormat::UpperRow | WeightFormat::LowerRow => n * (n - 1) / 2,
            WeightFormat::UpperDiagRow | WeightFormat::LowerDiagRow => n * (n + 1) / 2,
        }
    }
}

fn parse_weight(token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::MalformedNumber(format!("edge weight '{token}'")))?;
    if !v.is_finite() {
        return Err(Error::MalformedNumber(format!(
            "edge weight '{token}' is not finite"
        )));
    }
    Ok(v)
}

/// Parses a TSPLIB file into a fully expanded instance.
pub fn parse_tsplib(text: &str) -> Result<TspInstance> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();

    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut weight_format: Option<String> = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut saw_coord_section = false;
    let mut saw_weight_section = false;

    let mut idx = 0;
    while idx < lines.len() {
        let line = lines[idx];
        idx += 1;
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            let value = value.trim();
            match key {
                "NAME" => name = value.to_string(),
                "DIMENSION" => {
                    let n: usize = value.parse().map_err(|_| {
                        Error::MalformedHeader(format!("DIMENSION '{value}'"))
                    })?;
                    if n == 0 {
                        return Err(Error::MalformedHeader("DIMENSION must be positive".into()));
                    }
                    dimension = Some(n);
                }
                "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_string()),
                "EDGE_WEIGHT_FORMAT" => weight_format = Some(value.to_string()),
                // TYPE, COMMENT, DISPLAY_DATA_TYPE, NODE_COORD_TYPE, ...
                _ => {}
            }
            continue;
        }

        let keyword = line.split_whitespace().next().unwrap_or("");
        match keyword {
            "NODE_COORD_SECTION" => {
                let n = dimension
                    .ok_or_else(|| Error::MalformedHeader("DIMENSION missing before NODE_COORD_SECTION".into()))?;
                saw_coord_section = true;
                coords = vec![None; n];
                for _ in 0..n {
                    let row = loop {
                        let candidate = lines.get(idx).copied().ok_or_else(|| {
                            Error::DimensionMismatch(format!(
                                "NODE_COORD_SECTION ended early, expected {n} nodes"
                            ))
                        })?;
                        idx += 1;
                        if !candidate.is_empty() {
                            break candidate;
                        }
                    };
                    let tokens: Vec<&str> = row.split_whitespace().collect();
                    if tokens.len() < 3 {
                        return Err(Error::MalformedNumber(format!(
                            "coordinate line '{row}'"
                        )));
                    }
                    let id: usize = tokens[0].parse().map_err(|_| {
                        Error::MalformedNumber(format!("node id '{}'", tokens[0]))
                    })?;
                    if id == 0 || id > n {
                        return Err(Error::IndexOutOfRange(format!(
                            "node id {id} outside 1..={n}"
                        )));
                    }
                    let x: f64 = tokens[1].parse().map_err(|_| {
                        Error::MalformedNumber(format!("coordinate '{}'", tokens[1]))
                    })?;
                    let y: f64 = tokens[2].parse().map_err(|_| {
                        Error::MalformedNumber(format!("coordinate '{}'", tokens[2]))
                    })?;
                    if !x.is_finite() || !y.is_finite() {
                        return Err(Error::MalformedNumber(format!(
                            "coordinate line '{row}' is not finite"
                        )));
                    }
                    coords[id - 1] = Some((x, y));
                }
            }
            "EDGE_WEIGHT_SECTION" => {
                saw_weight_section = true;
                // Consume numeric lines until another section keyword or EOF.
                while idx < lines.len() {
                    let row = lines[idx];
                    if row.is_empty() {
                        idx += 1;
                        continue;
                    }
                    let first = row.split_whitespace().next().unwrap_or("");
                    if first.parse::<f64>().is_err() {
                        break;
                    }
                    for token in row.split_whitespace() {
                        weights.push(parse_weight(token)?);
                    }
                    idx += 1;
                }
            }
            "DISPLAY_DATA_SECTION" => {
                let n = dimension.unwrap_or(0);
                idx += n; // display coordinates carry no weight information
            }
            "EOF" => break,
            other => {
                return Err(Error::MalformedHeader(format!("unexpected line '{other}'")));
            }
        }
    }

    let n = dimension.ok_or_else(|| Error::MalformedHeader("DIMENSION missing".into()))?;
    let weight_type =
        weight_type.ok_or_else(|| Error::MalformedHeader("EDGE_WEIGHT_TYPE missing".into()))?;

    match weight_type.as_str() {
        "EUC_2D" => {
            if !saw_coord_section {
                return Err(Error::MalformedHeader(
                    "EUC_2D instance without NODE_COORD_SECTION".into(),
                ));
            }
            let mut pts = Vec::with_capacity(n);
            for (i, c) in coords.iter().enumerate() {
                match c {
                    Some(p) => pts.push(*p),
                    None => {
                        return Err(Error::DimensionMismatch(format!(
                            "node {} has no coordinates",
                            i + 1
                        )))
                    }
                }
            }
            TspInstance::from_coords(name, pts)
        }
        "EXPLICIT" => {
            if !saw_weight_section {
                return Err(Error::MalformedHeader(
                    "EXPLICIT instance without EDGE_WEIGHT_SECTION".into(),
                ));
            }
            let format = WeightFormat::parse(
                weight_format
                    .ok_or_else(|| Error::MalformedHeader("EDGE_WEIGHT_FORMAT missing".into()))?
                    .as_str(),
            )?;
            let expected = format.entry_count(n);
            if weights.len() != expected {
                return Err(Error::DimensionMismatch(format!(
                    "EDGE_WEIGHT_SECTION has {} entries, expected {expected} for n = {n}",
                    weights.len()
                )));
            }
            let dist = expand(format, n, &weights);
            let mut t = TspInstance::from_matrix(name, dist)?;
            t.source = TspSource::ExplicitMatrix;
            Ok(t)
        }
        other => Err(Error::UnknownFormat(format!("EDGE_WEIGHT_TYPE {other}"))),
    }
}

/// Expands a (possibly triangular) entry list to a full matrix, mirroring
/// across the diagonal for the triangular formats.
fn expand(format: WeightFormat, n: usize, weights: &[f64]) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    let mut k = 0;
    let mut put = |m: &mut SquareMatrix, i: usize, j: usize| {
        m.set(i, j, weights[k]);
        m.set(j, i, weights[k]);
        k += 1;
    };
    match format {
        WeightFormat::FullMatrix => {
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, weights[i * n + j]);
                }
            }
        }
        WeightFormat::UpperRow => {
            for i in 0..n {
                for j in i + 1..n {
                    put(&mut m, i, j);
                }
            }
        }
        WeightFormat::LowerRow => {
            for i in 0..n {
                for j in 0..i {
                    put(&mut m, i, j);
                }
            }
        }
        WeightFormat::UpperDiagRow => {
            for i in 0..n {
                for j in i..n {
                    put(&mut m, i, j);
                }
            }
        }
        WeightFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    put(&mut m, i, j);
                }
            }
        }
    }
    m
}

/// Serializes the expanded distance matrix as an EXPLICIT FULL_MATRIX file.
/// Weights use the shortest round-trip decimal form, so parsing the output
/// reproduces the matrix bit for bit.
pub fn serialize_tsplib(t: &TspInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME: {}\n", t.name));
    out.push_str("TYPE: TSP\n");
    out.push_str(&format!("DIMENSION: {}\n", t.n));
    out.push_str("EDGE_WEIGHT_TYPE: EXPLICIT\n");
    out.push_str("EDGE_WEIGHT_FORMAT: FULL_MATRIX\n");
    out.push_str("EDGE_WEIGHT_SECTION\n");
    for i in 0..t.n {
        let row: Vec<String> = t.dist.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("EOF\n");
    out
}
