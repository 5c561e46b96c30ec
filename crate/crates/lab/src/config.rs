//! Run configuration: a flat `key = value` file plus command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::LabError;

/// Environment variable consulted when no output directory is given.
pub const OUT_ENV: &str = "RDE_LAB_OUT";
const DEFAULT_OUT: &str = "rde-lab-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Tails,
    Speed,
    Sturm,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Tails => "tails",
            Command::Speed => "speed",
            Command::Sturm => "sturm",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Overrides the tail exponent of every check whose oracle is valid for any kappa.
    pub kappa: Option<f64>,
    pub seed: u64,
    /// Overrides every check's default replica count.
    pub replicas: Option<usize>,
    pub workers: usize,
    /// Named step sizes, e.g. `dt.ray_knight = 1e-4`.
    pub dt: BTreeMap<String, f64>,
    /// `None` until resolved by [`RunConfig::output_dir`].
    pub output_dir: Option<PathBuf>,
    pub suite: Vec<String>,
    /// Overrides the radius grid of the tail checks.
    pub r_grid: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            kappa: None,
            seed: 1,
            replicas: None,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            dt: BTreeMap::new(),
            output_dir: None,
            suite: Vec::new(),
            r_grid: None,
        }
    }

    /// The configured directory, else `$RDE_LAB_OUT`, else `./rde-lab-out`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUT),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        let bad = |what: &str| LabError::Config(format!("`{key}`: {what}, got `{value}`"));
        match key {
            "command" => {
                self.command = <Command as clap::ValueEnum>::from_str(value, true).map_err(|_| bad("unknown command"))?
            }
            "kappa" => self.kappa = Some(value.parse().map_err(|_| bad("expected a real"))?),
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an unsigned integer"))?,
            "replicas" => self.replicas = Some(value.parse().map_err(|_| bad("expected an unsigned integer"))?),
            "workers" => self.workers = value.parse().map_err(|_| bad("expected an unsigned integer"))?,
            "out" | "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "suite" => self.suite = split_list(value),
            "r_grid" => {
                self.r_grid = Some(
                    split_list(value)
                        .iter()
                        .map(|s| s.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("expected comma-separated reals"))?,
                )
            }
            _ => match key.strip_prefix("dt.") {
                Some(name) if !name.is_empty() => {
                    let v: f64 = value.parse().map_err(|_| bad("expected a real"))?;
                    self.dt.insert(name.to_string(), v);
                }
                _ => return Err(LabError::Config(format!("unknown key `{key}`"))),
            },
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<(), LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        self.load_str(&text)
    }

    pub fn load_str(&mut self, text: &str) -> Result<(), LabError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.replicas == Some(0) {
            return Err(LabError::Config("replicas must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(LabError::Config("workers must be >= 1".into()));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(LabError::Config(format!("kappa must be finite and > 0, got {k}")));
            }
        }
        if let Some(g) = &self.r_grid {
            if g.len() < 3 {
                return Err(LabError::Config(format!(
                    "r_grid needs at least 3 radii for a slope fit, got {}",
                    g.len()
                )));
            }
            if !(g[0] > 0.0 && g.windows(2).all(|w| w[0] < w[1])) {
                return Err(LabError::Config("r_grid must be positive and strictly increasing".into()));
            }
        }
        for (k, v) in &self.dt {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(LabError::Config(format!("dt.{k} must be finite and > 0")));
            }
        }
        Ok(())
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}
