//! Batch driver for the `rde-core` verification suites.
//!
//! [`run`] resolves the checks selected by a [`RunConfig`], evaluates them on
//! a fixed worker pool and writes the artifacts into the output directory:
//!
//! | file | columns |
//! |---|---|
//! | `checks.csv` | `check,anchor,statistic,threshold,verdict,n` |
//! | `ks.csv` | `check,n1,n2,statistic,threshold,verdict` |
//! | `tails.csv`, `tails_*.csv` | `r,n,hits,p_hat,stderr` |
//! | `tails_fit.csv` | `check,kappa,slope,slope_stderr,reference_slope` |
//! | `dufresne_samples.csv` | `s_infinity` |
//! | `report.json` | per-check records, overall verdict, run metadata |
//!
//! CSV bodies depend only on the configuration and the seed. Timings and the
//! wall clock appear in `report.json` only.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub mod config;
pub mod output;
pub mod pool;
pub mod registry;

pub use config::{Command, RunConfig};
pub use pool::Pool;
pub use registry::{registry, Check};

use output::{fmt17, write_fits, write_ks, write_samples, write_tail_curve};
use registry::{Artifacts, Ctx, Params};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown check `{name}`; registered checks: {registry}")]
    UnknownCheck { name: String, registry: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("file format: {0}")]
    Format(String),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] rde_core::Error),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.to_path_buf(), source }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        LabError::Csv { path: path.to_path_buf(), source }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub n: usize,
    pub kappa: f64,
    pub runtime_s: f64,
    pub details: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub version: String,
    pub command: Command,
    pub replicas: Option<usize>,
    pub kappa: Option<f64>,
    pub dt: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub workers: usize,
    pub started_unix_s: f64,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub overall: Verdict,
    pub fingerprint: Fingerprint,
    pub checks: Vec<CheckRecord>,
    pub metadata: Metadata,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.overall == Verdict::Pass
    }

    /// 0 when every check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Exit status for an operational failure.
pub const EXIT_ERROR: i32 = 1;

/// `(name, anchor, command)` of every registered check.
pub fn list_checks() -> Vec<(&'static str, &'static str, Command)> {
    registry().iter().map(|c| (c.name, c.anchor, c.group)).collect()
}

/// The checks a configuration selects, in registry order.
pub fn select(cfg: &RunConfig) -> Result<Vec<Check>, LabError> {
    let all = registry();
    for name in &cfg.suite {
        if !all.iter().any(|c| c.name == name) {
            let names: Vec<&str> = all.iter().map(|c| c.name).collect();
            return Err(LabError::UnknownCheck { name: name.clone(), registry: names.join(", ") });
        }
    }
    let known_steps: Vec<&str> = all.iter().flat_map(|c| c.steps.iter().copied()).collect();
    for k in cfg.dt.keys() {
        if !known_steps.contains(&k.as_str()) {
            return Err(LabError::Config(format!("unknown step `dt.{k}`; known steps: {}", known_steps.join(", "))));
        }
    }
    Ok(all
        .into_iter()
        .filter(|c| if cfg.suite.is_empty() { cfg.command == Command::All || c.group == cfg.command } else { cfg.suite.iter().any(|s| s == c.name) })
        .collect())
}

/// Runs the selected checks and writes every artifact.
pub fn run(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    cfg.validate()?;
    let checks = select(cfg)?;
    let out = output::ensure_dir(&cfg.output_dir())?;
    let pool = Pool::new(cfg.workers)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let t0 = Instant::now();
    let mut ctx = Ctx { pool: &pool, cfg, art: Artifacts::default() };
    let mut records = Vec::with_capacity(checks.len());
    for c in &checks {
        let p = Params {
            n: cfg.replicas.unwrap_or(c.default_n),
            kappa: if c.kappa_free { cfg.kappa.unwrap_or(c.default_kappa) } else { c.default_kappa },
            seed: cfg.seed,
        };
        let t = Instant::now();
        let o = c.run(&mut ctx, p)?;
        records.push(CheckRecord {
            name: c.name.to_string(),
            anchor: c.anchor.to_string(),
            statistic: o.statistic,
            threshold: o.threshold,
            verdict: if o.pass { Verdict::Pass } else { Verdict::Fail },
            n: p.n,
            kappa: p.kappa,
            runtime_s: t.elapsed().as_secs_f64(),
            details: o.details,
        });
    }
    write_artifacts(&out, &records, &ctx.art)?;
    let overall = if records.iter().all(|r| r.verdict == Verdict::Pass) { Verdict::Pass } else { Verdict::Fail };
    let report = VerificationReport {
        overall,
        fingerprint: Fingerprint {
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: cfg.command,
            replicas: cfg.replicas,
            kappa: cfg.kappa,
            dt: cfg.dt.clone(),
        },
        checks: records,
        metadata: Metadata { workers: pool.workers(), started_unix_s: started, runtime_s: t0.elapsed().as_secs_f64() },
    };
    let path = out.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| LabError::io(&path, e))?;
    Ok(report)
}

fn write_artifacts(out: &Path, records: &[CheckRecord], art: &Artifacts) -> Result<(), LabError> {
    let path = out.join("checks.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| LabError::csv(&path, e))?;
    w.write_record(["check", "anchor", "statistic", "threshold", "verdict", "n"]).map_err(|e| LabError::csv(&path, e))?;
    for r in records {
        w.write_record([
            r.name.as_str(),
            r.anchor.as_str(),
            &fmt17(r.statistic),
            &fmt17(r.threshold),
            r.verdict.as_str(),
            &r.n.to_string(),
        ])
        .map_err(|e| LabError::csv(&path, e))?;
    }
    w.flush().map_err(|e| LabError::io(&path, e))?;
    if !art.ks.is_empty() {
        write_ks(&out.join("ks.csv"), &art.ks)?;
    }
    for (stem, curve) in &art.tails {
        write_tail_curve(&out.join(format!("{stem}.csv")), curve)?;
    }
    if !art.fits.is_empty() {
        write_fits(&out.join("tails_fit.csv"), &art.fits)?;
    }
    for (stem, column, values) in &art.samples {
        write_samples(&out.join(format!("{stem}.csv")), column, values)?;
    }
    Ok(())
}
