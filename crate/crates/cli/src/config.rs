//! Experiment configuration files.
//!
//! A config is a TOML document. Each command reads its own sections and
//! ignores the others, so one file can drive several commands:
//!
//! ```toml
//! [analyze]
//! links = [1, 2, 5]
//! requests = [4, 8]
//! p = [0.3, 0.7]
//! trials = 2000
//!
//! [rate]
//! links = [20]
//! p = [0.3, 0.7]
//! horizon = 500
//! trials = 2000
//! output = "curves"        # or "trajectories"
//!
//! [scenario]
//! p_gen = 0.5
//! p_swap = 1.0
//! lifetime = 30            # or "inf"
//! requests = 20
//! size = 5
//! k = 1
//! topology = "grid"        # or "line"
//!
//! [benchmark]
//! algorithms = ["MG", "NL", "QP"]
//! inner = 100
//! outer = 50
//!
//! [sweep]
//! axis = "p_gen"
//! values = [0.1, 0.3, 0.5, 0.7, 0.9]
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer};
use thiserror::Error;

use entroute_core::bench::Benchmark;
use entroute_core::engine::{Lifetime, Scenario, SwapTiming, DEFAULT_SLOT_CAP};
use entroute_core::routing::Algorithm;
use entroute_core::topology::Shape;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error("override `{key}`: {reason}")]
    OverridePath { key: String, reason: String },
    #[error("missing [{0}] section")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] entroute_core::Error),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub analyze: Option<AnalyzeConfig>,
    pub rate: Option<RateConfig>,
    pub scenario: Option<ScenarioConfig>,
    pub benchmark: Option<BenchmarkConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub links: Vec<usize>,
    #[serde(default = "one")]
    pub requests: Vec<usize>,
    pub p: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn one() -> Vec<usize> {
    vec![1]
}

fn default_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateOutput {
    #[default]
    Curves,
    Trajectories,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub links: Vec<usize>,
    pub p: Vec<f64>,
    pub horizon: usize,
    pub trials: usize,
    #[serde(default)]
    pub output: RateOutput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeValue(pub Lifetime);

impl<'de> Deserialize<'de> for LifetimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Slots(i64),
            Float(f64),
            Word(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Slots(l) if l >= 1 && l <= i64::from(u32::MAX) => Ok(LifetimeValue(Lifetime::Finite(l as u32))),
            Raw::Float(f) if f == f64::INFINITY => Ok(LifetimeValue(Lifetime::Infinite)),
            Raw::Word(w) if matches!(w.as_str(), "inf" | "infinite") => Ok(LifetimeValue(Lifetime::Infinite)),
            _ => Err(serde::de::Error::custom("lifetime must be a positive integer or \"inf\"")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub p_gen: f64,
    pub p_swap: f64,
    pub lifetime: LifetimeValue,
    pub requests: usize,
    pub size: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_shape")]
    pub topology: Shape,
}

fn default_k() -> usize {
    1
}

fn default_shape() -> Shape {
    Shape::Grid
}

impl ScenarioConfig {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            p_gen: self.p_gen,
            p_swap: self.p_swap,
            lifetime: self.lifetime.0,
            requests: self.requests,
            size: self.size,
            k: self.k,
            shape: self.topology,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "all_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default = "default_inner")]
    pub inner: usize,
    #[serde(default = "default_outer")]
    pub outer: usize,
    #[serde(default = "default_slot_cap")]
    pub slot_cap: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            algorithms: all_algorithms(),
            inner: default_inner(),
            outer: default_outer(),
            slot_cap: default_slot_cap(),
        }
    }
}

fn all_algorithms() -> Vec<String> {
    Algorithm::ALL.iter().map(|a| a.name().to_owned()).collect()
}

fn default_inner() -> usize {
    100
}

fn default_outer() -> usize {
    50
}

fn default_slot_cap() -> u64 {
    DEFAULT_SLOT_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    PGen,
    PSwap,
    Lifetime,
    Requests,
    Size,
    K,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::PGen => "p_gen",
            Axis::PSwap => "p_swap",
            Axis::Lifetime => "lifetime",
            Axis::Requests => "requests",
            Axis::Size => "size",
            Axis::K => "k",
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub values: Vec<toml::Value>,
}

impl Config {
    /// Reads `path` and applies `key=value` overrides, where `key` is a dotted
    /// path into the document and `value` is a TOML value (bare words are
    /// taken as strings).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        let mut table: toml::Table = text.parse()?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Ok(toml::Value::Table(table).try_into()?)
    }

    pub fn benchmark(&self, seed: u64) -> Result<Benchmark, ConfigError> {
        let scenario = self.scenario.as_ref().ok_or(ConfigError::Missing("scenario"))?.scenario();
        benchmark_for(scenario, &self.benchmark.clone().unwrap_or_default(), seed)
    }

    /// One benchmark per sweep value, in file order.
    pub fn sweep(&self, seed: u64) -> Result<Vec<Benchmark>, ConfigError> {
        let base = self.scenario.as_ref().ok_or(ConfigError::Missing("scenario"))?.scenario();
        let sweep = self.sweep.as_ref().ok_or(ConfigError::Missing("sweep"))?;
        if sweep.values.is_empty() {
            return Err(ConfigError::Invalid("sweep.values is empty".into()));
        }
        let bench = self.benchmark.clone().unwrap_or_default();
        sweep.values.iter().map(|v| benchmark_for(with_axis(base, sweep.axis, v)?, &bench, seed)).collect()
    }
}

fn benchmark_for(scenario: Scenario, config: &BenchmarkConfig, seed: u64) -> Result<Benchmark, ConfigError> {
    let algorithms = config
        .algorithms
        .iter()
        .map(|name| name.parse::<Algorithm>().map_err(ConfigError::Invalid))
        .collect::<Result<Vec<_>, _>>()?;
    let benchmark = Benchmark {
        scenario,
        algorithms,
        inner: config.inner,
        outer: config.outer,
        seed,
        slot_cap: config.slot_cap,
        swap_timing: SwapTiming::PerSlot,
    };
    benchmark.validate()?;
    Ok(benchmark)
}

fn with_axis(mut s: Scenario, axis: Axis, value: &toml::Value) -> Result<Scenario, ConfigError> {
    let bad = || ConfigError::Invalid(format!("sweep value {value} does not fit axis {axis}"));
    let float = || value.as_float().or_else(|| value.as_integer().map(|i| i as f64)).ok_or_else(bad);
    let count = || value.as_integer().and_then(|i| usize::try_from(i).ok()).ok_or_else(bad);
    match axis {
        Axis::PGen => s.p_gen = float()?,
        Axis::PSwap => s.p_swap = float()?,
        Axis::Lifetime => s.lifetime = value.clone().try_into::<LifetimeValue>().map_err(|_| bad())?.0,
        Axis::Requests => s.requests = count()?,
        Axis::Size => s.size = count()?,
        Axis::K => s.k = count()?,
    }
    Ok(s)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| ConfigError::Override(item.to_owned()))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(item.to_owned()));
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_owned()),
    };
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        let entry = current.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry.as_table_mut().ok_or_else(|| ConfigError::OverridePath {
            key: key.to_owned(),
            reason: format!("`{part}` is not a section"),
        })?;
    }
    current.insert(parts[parts.len() - 1].to_owned(), value);
    Ok(())
}
