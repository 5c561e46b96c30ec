//! CSV and JSON artifacts.
//!
//! Every float in a CSV body is written with 17 significant digits, so the
//! bodies round-trip exactly and compare byte for byte across runs.

use std::fs;
use std::path::{Path, PathBuf};

use rde_core::environment::Environment;
use rde_core::stats::{KsResult, SlopeFit, TailCurve};

use crate::LabError;

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, LabError> {
    csv::Writer::from_path(path).map_err(|e| LabError::csv(path, e))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| LabError::csv(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| LabError::csv(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// `r,n,hits,p_hat,stderr`, one row per radius.
pub fn write_tail_curve(path: &Path, curve: &TailCurve) -> Result<(), LabError> {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| vec![fmt17(p.r), p.n.to_string(), p.hits.to_string(), fmt17(p.p_hat), fmt17(p.stderr)])
        .collect();
    write_rows(path, &["r", "n", "hits", "p_hat", "stderr"], &rows)
}

/// Reads a tail curve written by [`write_tail_curve`].
pub fn read_tail_curve(path: &Path) -> Result<TailCurve, LabError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::csv(path, e))?;
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| LabError::csv(path, e))?;
        let f = |i: usize| -> Result<f64, LabError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| LabError::Format(format!("{}: bad field {i}", path.display())))
        };
        let n = f(1)? as u64;
        let hits = f(2)? as u64;
        let mut p = rde_core::stats::TailPoint::from_counts(f(0)?, n, hits);
        p.stderr = f(4)?;
        points.push(p);
    }
    Ok(TailCurve { points })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub check: String,
    pub kappa: f64,
    pub fit: SlopeFit,
}

/// `check,kappa,slope,slope_stderr,reference_slope`; the reference is `1 - kappa`.
pub fn write_fits(path: &Path, fits: &[FitRow]) -> Result<(), LabError> {
    let rows: Vec<Vec<String>> = fits
        .iter()
        .map(|f| {
            vec![f.check.clone(), fmt17(f.kappa), fmt17(f.fit.slope), fmt17(f.fit.slope_stderr), fmt17(1.0 - f.kappa)]
        })
        .collect();
    write_rows(path, &["check", "kappa", "slope", "slope_stderr", "reference_slope"], &rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KsRow {
    pub check: String,
    pub ks: KsResult,
}

/// `check,n1,n2,statistic,threshold,verdict`; `n2` is empty for one-sample tests.
pub fn write_ks(path: &Path, rows: &[KsRow]) -> Result<(), LabError> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.check.clone(),
                r.ks.n1.to_string(),
                r.ks.n2.map(|n| n.to_string()).unwrap_or_default(),
                fmt17(r.ks.statistic),
                fmt17(r.ks.pass_threshold),
                r.ks.verdict.as_str().to_string(),
            ]
        })
        .collect();
    write_rows(path, &["check", "n1", "n2", "statistic", "threshold", "verdict"], &rows)
}

/// A one-column sample file.
pub fn write_samples(path: &Path, column: &str, values: &[f64]) -> Result<(), LabError> {
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![fmt17(*v)]).collect();
    write_rows(path, &[column], &rows)
}

pub fn read_samples(path: &Path) -> Result<(String, Vec<f64>), LabError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::csv(path, e))?;
    let header = r.headers().map_err(|e| LabError::csv(path, e))?;
    if header.len() != 1 {
        return Err(LabError::Format(format!("{}: expected one column, got {}", path.display(), header.len())));
    }
    let name = header[0].to_string();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| LabError::csv(path, e))?;
        out.push(
            rec[0].parse().map_err(|_| LabError::Format(format!("{}: `{}` is not a number", path.display(), &rec[0])))?,
        );
    }
    Ok((name, out))
}

/// Writes the drawn potential as `x,w` rows.
pub fn write_environment(path: &Path, env: &Environment) -> Result<(), LabError> {
    let (xs, ws) = env.nodes();
    let rows: Vec<Vec<String>> = xs.iter().zip(&ws).map(|(x, w)| vec![fmt17(*x), fmt17(*w)]).collect();
    write_rows(path, &["x", "w"], &rows)
}

/// Reads an `x,w` snapshot back as a fixed environment.
pub fn read_environment(path: &Path, kappa: f64) -> Result<Environment, LabError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::csv(path, e))?;
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| LabError::csv(path, e))?;
        let p = |i: usize| -> Result<f64, LabError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| LabError::Format(format!("{}: bad field {i}", path.display())))
        };
        xs.push(p(0)?);
        ws.push(p(1)?);
    }
    Ok(Environment::from_nodes(kappa, &xs, &ws)?)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
