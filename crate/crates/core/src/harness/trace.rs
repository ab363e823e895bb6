use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::IterationRecord;
use crate::learners::Algorithm;

pub const TRACE_HEADER: &str = "t,loss,metric,regret";

/// 17 significant digits, enough to round-trip any `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn write_trace_to<W: Write>(records: &[IterationRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.t, real(r.loss), real(r.metric), optional(r.regret))?;
    }
    out.flush()
}

/// Writes `t,loss,metric,regret`, one row per round; the regret cell is
/// empty when no offline optimum was computed.
pub fn write_trace(records: &[IterationRecord], path: impl AsRef<Path>) -> io::Result<()> {
    write_trace_to(records, BufWriter::new(File::create(path)?))
}

/// Wide CSV with a `metric`/`regret` column pair per algorithm. All runs
/// must have the same length.
pub fn write_comparison_to<W: Write>(runs: &[(Algorithm, &[IterationRecord])], mut out: W) -> io::Result<()> {
    let len = runs.first().map(|r| r.1.len()).unwrap_or(0);
    if runs.iter().any(|r| r.1.len() != len) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "runs differ in length"));
    }
    let mut header = vec!["t".to_string()];
    for (algo, _) in runs {
        header.push(format!("{algo}_metric"));
        header.push(format!("{algo}_regret"));
    }
    writeln!(out, "{}", header.join(","))?;
    for i in 0..len {
        let mut row = vec![(i + 1).to_string()];
        for (_, records) in runs {
            row.push(real(records[i].metric));
            row.push(optional(records[i].regret));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn write_comparison(runs: &[(Algorithm, &[IterationRecord])], path: impl AsRef<Path>) -> io::Result<()> {
    write_comparison_to(runs, BufWriter::new(File::create(path)?))
}
