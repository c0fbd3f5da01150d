//! Flag and config-file resolution. Values given on the command line win over
//! the `--config` TOML file.

use std::path::{Path, PathBuf};

use clap::Args;
use toml::{Table, Value};

use central_field::{AngularMomentum, EnergyLevel, Flavor, PotentialSpec};

use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Homogeneity exponent of the potential.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Energy level (negative).
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Softening length.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// none | plain | amended; defaults to none when epsilon is 0, plain otherwise.
    #[arg(long)]
    pub flavor: Option<String>,
    /// Angular momentum.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps (default: all processors).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// TOML file with `key = value` settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for file-producing commands.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "alpha", "h", "epsilon", "flavor", "c", "seed", "jobs", "out", "samples", "flavor_a",
    "flavor_b", "epsilon_a", "c_grid", "points", "tau", "r0", "v0", "u0", "from", "field",
];

/// Merged view of flags and the config file.
pub struct Settings {
    pub common: Common,
    file: Table,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("invalid `{field}`: {reason}"))
}

impl Settings {
    pub fn load(common: Common) -> Result<Self, CliError> {
        let file = match &common.config {
            None => Table::new(),
            Some(path) => read_table(path)?,
        };
        for key in file.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(invalid(key, "unknown config key"));
            }
        }
        Ok(Settings { common, file })
    }

    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(invalid(key, format!("expected a number, got {other}"))),
        }
    }

    pub fn int(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(invalid(key, format!("expected a non-negative integer, got {other}"))),
        }
    }

    pub fn string(&self, key: &str, flag: Option<&str>) -> Result<Option<String>, CliError> {
        if let Some(s) = flag {
            return Ok(Some(s.to_owned()));
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(invalid(key, format!("expected a string, got {other}"))),
        }
    }

    pub fn require_f64(&self, key: &str, flag: Option<f64>) -> Result<f64, CliError> {
        self.f64(key, flag)?
            .ok_or_else(|| invalid(key, "is required"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.int("seed", self.common.seed)?.unwrap_or(0))
    }

    pub fn jobs(&self) -> Result<Option<usize>, CliError> {
        let jobs = self.int("jobs", self.common.jobs.map(|j| j as u64))?;
        if jobs == Some(0) {
            return Err(invalid("jobs", "must be at least 1"));
        }
        Ok(jobs.map(|j| j as usize))
    }

    pub fn out_dir(&self) -> Result<PathBuf, CliError> {
        if let Some(p) = &self.common.out {
            return Ok(p.clone());
        }
        Ok(self
            .string("out", None)?
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")))
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.require_f64("alpha", self.common.alpha)
    }

    pub fn energy(&self) -> Result<EnergyLevel, CliError> {
        let h = self.require_f64("h", self.common.h)?;
        Ok(EnergyLevel::new(h)?)
    }

    pub fn epsilon(&self) -> Result<f64, CliError> {
        Ok(self.f64("epsilon", self.common.epsilon)?.unwrap_or(0.0))
    }

    pub fn momentum(&self) -> Result<Option<AngularMomentum>, CliError> {
        match self.f64("c", self.common.c)? {
            None => Ok(None),
            Some(c) => Ok(Some(AngularMomentum::new(c)?)),
        }
    }

    /// The potential spec from `alpha`, `epsilon` and `flavor`.
    pub fn spec(&self) -> Result<PotentialSpec, CliError> {
        let flavor = self.string("flavor", self.common.flavor.as_deref())?;
        let eps = self.epsilon()?;
        Ok(PotentialSpec::new(self.alpha()?, eps, resolve_flavor(flavor.as_deref(), eps)?)?)
    }
}

pub fn resolve_flavor(name: Option<&str>, epsilon: f64) -> Result<Flavor, CliError> {
    match name {
        Some(s) => s.parse().map_err(|_| invalid("flavor", format!("unknown flavor `{s}`"))),
        None if epsilon == 0.0 => Ok(Flavor::NonSmoothed),
        None => Ok(Flavor::PlainSmoothed),
    }
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
    text.parse::<Table>()
        .map_err(|e| invalid("config", e.to_string().replace('\n', " ")))
}

/// `start:stop:count` with `count >= 1` values spaced evenly.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || invalid("c-grid", format!("expected start:stop:count, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}
