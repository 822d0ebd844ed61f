//! Flat `key = value` experiment files. Blank lines and text after `#` are
//! ignored; every key is optional.
//!
//! ```text
//! model = step                 # registry name
//! scheme = both                # em | gm | both
//! seed = 1
//! paths = 4096
//! levels = 1:8                 # k_min:k_max, delta_k = T 2^-(k+2)
//! horizon = 1.0
//! x0 = 0.1, 0.0
//! eps = 0.02, 0.04, 0.08, 0.16
//! occupation_steps_log2 = 10
//! out = results
//! threads = 0                  # 0: one per core
//! dump_paths = false
//! param.beta = 0.3             # model parameter override
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::{self, ModelSpec};
use crate::solver::SchemeKind;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: String,
    pub params: BTreeMap<String, String>,
    pub schemes: Vec<SchemeKind>,
    pub seed: u64,
    pub n_paths: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub horizon: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub eps_grid: Vec<f64>,
    pub occupation_steps_log2: u32,
    pub out: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub dump_paths: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "step".into(),
            params: BTreeMap::new(),
            schemes: vec![SchemeKind::EulerMaruyama],
            seed: 1,
            n_paths: 1 << 12,
            k_min: 1,
            k_max: 8,
            horizon: None,
            x0: None,
            eps_grid: vec![0.02, 0.04, 0.08, 0.16],
            occupation_steps_log2: 10,
            out: PathBuf::from("results"),
            threads: 0,
            dump_paths: false,
        }
    }
}

fn reals(value: &str) -> Option<Vec<f64>> {
    value.split(',').map(|v| v.trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect()
}

pub fn parse_schemes(value: &str) -> Result<Vec<SchemeKind>> {
    match value.trim().to_ascii_lowercase().as_str() {
        "both" => Ok(SchemeKind::ALL.to_vec()),
        other => Ok(vec![other.parse()?]),
    }
}

pub fn parse_levels(value: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidArgument(format!("levels '{value}' must look like k_min:k_max"));
    let (a, b) = value.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies the lines of a config file on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config { .. } => e,
                other => err(other.to_string()),
            })?;
        }
        Ok(())
    }

    /// Sets one key as it would appear in a config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let invalid = |what: &str| Error::InvalidArgument(format!("{key}: '{value}' is not {what}"));
        match key {
            "model" => self.model = value.to_string(),
            "scheme" => self.schemes = parse_schemes(value)?,
            "seed" => self.seed = value.parse().map_err(|_| invalid("an unsigned integer"))?,
            "paths" => self.n_paths = value.parse().map_err(|_| invalid("an unsigned integer"))?,
            "levels" => (self.k_min, self.k_max) = parse_levels(value)?,
            "horizon" => {
                self.horizon =
                    Some(value.parse().ok().filter(|t: &f64| *t > 0.0).ok_or_else(|| invalid("a positive number"))?)
            }
            "x0" => self.x0 = Some(reals(value).ok_or_else(|| invalid("a list of numbers"))?),
            "eps" => self.eps_grid = reals(value).ok_or_else(|| invalid("a list of numbers"))?,
            "occupation_steps_log2" => {
                self.occupation_steps_log2 = value.parse().map_err(|_| invalid("an unsigned integer"))?
            }
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = value.parse().map_err(|_| invalid("an unsigned integer"))?,
            "dump_paths" => self.dump_paths = value.parse().map_err(|_| invalid("true or false"))?,
            k => match k.strip_prefix("param.") {
                Some(p) if !p.is_empty() => {
                    self.params.insert(p.to_string(), value.to_string());
                }
                _ => return Err(Error::InvalidArgument(format!("unknown key '{k}'"))),
            },
        }
        Ok(())
    }

    /// Level and path-count constraints shared by every driver.
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 || self.k_max <= self.k_min {
            return Err(Error::InvalidArgument(format!(
                "levels {}:{} need k_max > k_min >= 1",
                self.k_min, self.k_max
            )));
        }
        if self.k_max > 24 {
            return Err(Error::InvalidArgument(format!("k_max = {} is too fine", self.k_max)));
        }
        if self.n_paths < 2 {
            return Err(Error::InvalidArgument("at least two paths are required".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidArgument("no scheme selected".into()));
        }
        Ok(())
    }

    /// The configured model with `x0` and `horizon` applied.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let mut spec = models::by_name(&self.model, &self.params)?;
        if let Some(x0) = &self.x0 {
            if x0.len() != spec.dim() {
                return Err(Error::DimensionMismatch { expected: spec.dim(), got: x0.len() });
            }
            spec.x0 = x0.clone();
        }
        if let Some(t) = self.horizon {
            spec.horizon = t;
        }
        Ok(spec)
    }

    /// Runs `f` on a rayon pool with the configured number of threads.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}
