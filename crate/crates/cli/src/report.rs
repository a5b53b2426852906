//! Benchmark rows, CSV serialization, and the console table.

use gpn_core::error::{Error, Result};
use gpn_core::solver::gap_percent;
use gpn_core::training::csv_float;

pub const CSV_HEADER: &str = "instance,n,method,cost,best_known,gap_percent,time_s,zero_ratio";

/// One benchmark result. The gap is present iff a best-known cost is;
/// `time_s` covers decoding only.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub method: String,
    pub cost: f64,
    pub best_known: Option<f64>,
    pub gap_percent: Option<f64>,
    pub time_s: f64,
    pub zero_ratio: Option<f64>,
}

impl BenchRow {
    pub fn new(
        instance: impl Into<String>,
        n: usize,
        method: impl Into<String>,
        cost: f64,
        best_known: Option<f64>,
        time_s: f64,
        zero_ratio: Option<f64>,
    ) -> Result<Self> {
        let gap = match best_known {
            Some(b) => Some(gap_percent(cost, b)?),
            None => None,
        };
        Ok(BenchRow {
            instance: instance.into(),
            n,
            method: method.into(),
            cost,
            best_known,
            gap_percent: gap,
            time_s,
            zero_ratio,
        })
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(csv_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.instance,
            self.n,
            self.method,
            csv_float(self.cost),
            opt(self.best_known),
            opt(self.gap_percent),
            csv_float(self.time_s),
            opt(self.zero_ratio),
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::MalformedNumber(format!(
                "expected 8 CSV fields, got {} in '{line}'",
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::MalformedNumber(format!("CSV number '{s}'")))
        };
        let opt_num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        Ok(BenchRow {
            instance: fields[0].to_string(),
            n: fields[1]
                .parse()
                .map_err(|_| Error::MalformedNumber(format!("CSV size '{}'", fields[1])))?,
            method: fields[2].to_string(),
            cost: num(fields[3])?,
            best_known: opt_num(fields[4])?,
            gap_percent: opt_num(fields[5])?,
            time_s: num(fields[6])?,
            zero_ratio: opt_num(fields[7])?,
        })
    }
}

pub fn write_csv(path: &std::path::Path, rows: &[BenchRow]) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Fixed-width console table in the cost/gap/time layout of the reference
/// benchmarks, with the zero-ratio column when any row carries one.
pub fn render_table(rows: &[BenchRow]) -> String {
    let with_zero = rows.iter().any(|r| r.zero_ratio.is_some());
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>5} {:<10} {:>14} {:>12} {:>9} {:>9}",
        "instance", "n", "method", "cost", "best_known", "gap[%]", "time[s]"
    ));
    if with_zero {
        out.push_str(&format!(" {:>9}", "zeros[%]"));
    }
    out.push('\n');
    for r in rows {
        let best = r
            .best_known
            .map(|v| format!("{v:.1}"))
            .unwrap_or_else(|| "-".into());
        let gap = r
            .gap_percent
            .map(|v| format!("{v:.2}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<14} {:>5} {:<10} {:>14.4} {:>12} {:>9} {:>9.3}",
            r.instance, r.n, r.method, r.cost, best, gap, r.time_s
        ));
        if with_zero {
            let z = r
                .zero_ratio
                .map(|v| format!("{:.2}", 100.0 * v))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(" {z:>9}"));
        }
        out.push('\n');
    }
    out
}

/// Two-column `name,cost` table of best-known costs, keyed by lowercase
/// instance name. A header line is allowed and skipped.
pub fn read_best_known(path: &std::path::Path) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line.eq_ignore_ascii_case("name,cost")) {
            continue;
        }
        let (name, cost) = line.split_once(',').ok_or_else(|| {
            Error::MalformedNumber(format!("best-known line '{line}' is not 'name,cost'"))
        })?;
        let cost: f64 = cost
            .trim()
            .parse()
            .map_err(|_| Error::MalformedNumber(format!("best-known cost '{cost}'")))?;
        out.push((name.trim().to_lowercase(), cost));
    }
    Ok(out)
}

pub fn lookup_best_known(table: &[(String, f64)], name: &str) -> Option<f64> {
    let key = name.to_lowercase();
    table.iter().find(|(n, _)| *n == key).map(|(_, c)| *c)
}
