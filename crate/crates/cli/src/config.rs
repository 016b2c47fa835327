//! JSON configuration files.
//!
//! ```json
//! {
//!   "base_seed": 42,
//!   "queues": [
//!     {"arrival_rate": 2.0,
//!      "service": {"kind": "exponential", "rate": 3.0},
//!      "gating": {"kind": "deterministic", "k": 1}}
//!   ]
//! }
//! ```
//!
//! Gating kinds: `gated`, `exhaustive`, `deterministic` (`k` an integer or
//! `"inf"`), `geometric` (`p`), `pmf` (`entries` as `[k, probability]`
//! pairs). Service kinds: `exponential` (`rate`), `deterministic` (`value`),
//! `lognormal` (`location`, `scale`), `pareto` (`shape`, `minimum`).

use std::fmt::Write as _;
use std::path::Path;

use polling_core::dist::{GatingDistribution, GatingIndex, ServiceDistribution};
use polling_core::{ModelConfig, QueueSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub base_seed: u64,
    pub queues: Vec<QueueFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueFile {
    pub arrival_rate: f64,
    pub service: ServiceFile,
    pub gating: GatingFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ServiceFile {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Lognormal { location: f64, scale: f64 },
    Pareto { shape: f64, minimum: f64 },
}

/// A gate count: a non-negative integer or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateCount {
    Finite(u64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GatingFile {
    Gated,
    Exhaustive,
    Deterministic { k: GateCount },
    Geometric { p: f64 },
    Pmf { entries: Vec<(GateCount, f64)> },
}

impl GateCount {
    pub fn resolve(&self) -> Result<GatingIndex, CliError> {
        match self {
            GateCount::Finite(k) => Ok(GatingIndex::Finite(*k)),
            GateCount::Named(s) if s == "inf" => Ok(GatingIndex::Infinite),
            GateCount::Named(s) => Err(CliError::Config(format!(
                "gate count {s:?} is neither an integer nor \"inf\""
            ))),
        }
    }
}

/// Parses `"inf"` or a non-negative integer.
pub fn parse_gate_count(s: &str) -> Result<GatingIndex, String> {
    match s.trim() {
        "inf" => Ok(GatingIndex::Infinite),
        t => t
            .parse::<u64>()
            .map(GatingIndex::Finite)
            .map_err(|e| format!("{t:?}: {e}")),
    }
}

pub fn gate_label(k: GatingIndex) -> serde_json::Value {
    match k {
        GatingIndex::Finite(k) => serde_json::Value::from(k),
        GatingIndex::Infinite => serde_json::Value::from("inf"),
    }
}

impl ServiceFile {
    fn resolve(&self) -> ServiceDistribution {
        match *self {
            ServiceFile::Exponential { rate } => ServiceDistribution::Exponential { rate },
            ServiceFile::Deterministic { value } => ServiceDistribution::Deterministic { value },
            ServiceFile::Lognormal { location, scale } => {
                ServiceDistribution::LogNormal { location, scale }
            }
            ServiceFile::Pareto { shape, minimum } => {
                ServiceDistribution::Pareto { shape, minimum }
            }
        }
    }
}

impl GatingFile {
    fn resolve(&self) -> Result<GatingDistribution, CliError> {
        Ok(match self {
            GatingFile::Gated => GatingDistribution::gated(),
            GatingFile::Exhaustive => GatingDistribution::exhaustive(),
            GatingFile::Deterministic { k } => GatingDistribution::Deterministic(k.resolve()?),
            GatingFile::Geometric { p } => GatingDistribution::Geometric { p: *p },
            GatingFile::Pmf { entries } => GatingDistribution::FinitePmf(
                entries
                    .iter()
                    .map(|(k, p)| Ok((k.resolve()?, *p)))
                    .collect::<Result<_, CliError>>()?,
            ),
        })
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_model_config(&self) -> Result<ModelConfig, CliError> {
        let queues = self
            .queues
            .iter()
            .map(|q| {
                Ok(QueueSpec::new(
                    q.arrival_rate,
                    q.service.resolve(),
                    q.gating.resolve()?,
                ))
            })
            .collect::<Result<_, CliError>>()?;
        Ok(ModelConfig {
            queues,
            base_seed: self.base_seed,
        })
    }

    /// SHA-256 of the canonical JSON form (after any seed override).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
