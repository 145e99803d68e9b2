//! CSV and JSON output, written atomically.
//!
//! Reals are printed with 17 significant digits; infinities and NaN are
//! spelled `inf`, `-inf`, `nan` in CSV and become `null` in JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::Field2;
use crate::harness::config::Format;
use crate::harness::sweep::SweepRow;
use crate::solver::PathRecord;

pub const PATH_COLUMNS: [&str; 8] =
    ["seed", "alpha", "hit", "tau_hat", "min_over_run", "singular_integral", "log_weight", "invalid"];

pub const SWEEP_COLUMNS: [&str; 8] = ["alpha", "n_paths", "n_hit", "p_hat", "ci_lo", "ci_hi", "mean_tau", "invalid_count"];

/// `{:.16e}` for finite values.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn json_real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Anything that can be written as a table.
pub trait Table {
    fn columns(&self) -> &'static [&'static str];
    fn csv_rows(&self) -> Vec<Vec<String>>;
    fn json_rows(&self) -> Vec<Value>;
}

impl Table for [PathRecord] {
    fn columns(&self) -> &'static [&'static str] {
        &PATH_COLUMNS
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    format_real(r.alpha),
                    u8::from(r.hit).to_string(),
                    format_real(r.tau_hat),
                    format_real(r.min_over_run()),
                    format_real(r.singular_integral),
                    format_real(r.log_weight),
                    u8::from(r.invalid).to_string(),
                ]
            })
            .collect()
    }

    fn json_rows(&self) -> Vec<Value> {
        self.iter()
            .map(|r| {
                json!({
                    "seed": r.seed,
                    "alpha": json_real(r.alpha),
                    "hit": u8::from(r.hit),
                    "tau_hat": json_real(r.tau_hat),
                    "min_over_run": json_real(r.min_over_run()),
                    "singular_integral": json_real(r.singular_integral),
                    "log_weight": json_real(r.log_weight),
                    "invalid": u8::from(r.invalid),
                })
            })
            .collect()
    }
}

impl Table for [SweepRow] {
    fn columns(&self) -> &'static [&'static str] {
        &SWEEP_COLUMNS
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                vec![
                    format_real(r.alpha),
                    r.n_paths.to_string(),
                    r.n_hit.to_string(),
                    format_real(r.p_hat),
                    format_real(r.ci_lo),
                    format_real(r.ci_hi),
                    format_real(r.mean_tau),
                    r.invalid_count.to_string(),
                ]
            })
            .collect()
    }

    fn json_rows(&self) -> Vec<Value> {
        self.iter()
            .map(|r| {
                json!({
                    "alpha": json_real(r.alpha),
                    "n_paths": r.n_paths,
                    "n_hit": r.n_hit,
                    "p_hat": json_real(r.p_hat),
                    "ci_lo": json_real(r.ci_lo),
                    "ci_hi": json_real(r.ci_hi),
                    "mean_tau": json_real(r.mean_tau),
                    "invalid_count": r.invalid_count,
                })
            })
            .collect()
    }
}

pub fn to_csv<T: Table + ?Sized>(table: &T) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(table.columns()).map_err(io)?;
    for row in table.csv_rows() {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn to_json<T: Table + ?Sized>(table: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Value::Array(table.json_rows()))?;
    out.push(b'\n');
    Ok(out)
}

/// Field history as CSV: a `t` column then one column per node.
pub fn field_csv(history: &Field2, dt: f64) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let header: Vec<String> = std::iter::once("t".to_string()).chain((0..history.cols()).map(|j| format!("x{j}"))).collect();
    w.write_record(&header).map_err(io)?;
    for n in 0..history.rows() {
        let row: Vec<String> =
            std::iter::once(format_real(n as f64 * dt)).chain(history.row(n).iter().map(|&v| format_real(v))).collect();
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failure never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn emit<T: Table + ?Sized>(table: &T, format: Format, path: &Path) -> Result<()> {
    let bytes = match format {
        Format::Csv => to_csv(table)?,
        Format::Json => to_json(table)?,
    };
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(f64::INFINITY), "inf");
        assert_eq!(format_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_real(f64::NAN), "nan");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_tables_are_header_only() {
        let paths: &[PathRecord] = &[];
        assert_eq!(to_csv(paths).unwrap(), b"seed,alpha,hit,tau_hat,min_over_run,singular_integral,log_weight,invalid\n");
        let rows: &[SweepRow] = &[];
        assert_eq!(to_csv(rows).unwrap(), b"alpha,n_paths,n_hit,p_hat,ci_lo,ci_hi,mean_tau,invalid_count\n");
        assert_eq!(to_json(rows).unwrap(), b"[]\n");
    }

    #[test]
    fn unwritable_path_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing").join("out.csv");
        let rows: &[SweepRow] = &[];
        assert!(emit(rows, Format::Csv, &target).is_err());
        assert!(!target.exists());
        let target = dir.path().join("out.csv");
        emit(rows, Format::Csv, &target).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
