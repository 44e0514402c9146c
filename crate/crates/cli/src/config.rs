//! JSON configuration documents.
//!
//! Run-wide keys (`samples`, `seed`, `stream`, `sampling`) are split off
//! first; the remaining keys are parsed strictly per command, so a typo is
//! reported by name.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use wiener_meter::{NestedFamily, PathSetSpec, Sampling, SeedSpec};

#[derive(Clone, Debug)]
pub struct Common {
    pub samples: Option<u64>,
    pub seed: SeedSpec,
    pub sampling: Sampling,
}

impl Common {
    pub fn samples(&self) -> Result<u64, String> {
        self.samples.ok_or_else(|| "missing field `samples`".to_string())
    }
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, String> {
    map.remove(key)
        .map(|v| serde_json::from_value(v).map_err(|e| format!("field `{key}`: {e}")))
        .transpose()
}

/// Splits the run-wide keys off a config object.
pub fn split(config: &Value) -> Result<(Common, Map<String, Value>), String> {
    let mut map = config
        .as_object()
        .cloned()
        .ok_or("config must be a JSON object")?;
    let common = Common {
        samples: take(&mut map, "samples")?,
        seed: SeedSpec::new(
            take(&mut map, "seed")?.unwrap_or(0),
            take(&mut map, "stream")?.unwrap_or(0),
        ),
        sampling: take(&mut map, "sampling")?.unwrap_or_default(),
    };
    Ok((common, map))
}

pub fn parse<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, String> {
    serde_json::from_value(Value::Object(map)).map_err(|e| e.to_string())
}

fn one() -> f64 {
    1.0
}

/// Levels as `"n": 8` or `"n_range": [1, 8]` (inclusive).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub n: Option<u32>,
    pub n_range: Option<[u32; 2]>,
}

impl Levels {
    pub fn list(&self) -> Result<Vec<u32>, String> {
        match (self.n, self.n_range) {
            (Some(n), None) => Ok(vec![n]),
            (None, Some([lo, hi])) if lo <= hi => Ok((lo..=hi).collect()),
            (None, Some(r)) => Err(format!("field `n_range`: empty range {r:?}")),
            (Some(_), Some(_)) => Err("give either `n` or `n_range`, not both".into()),
            (None, None) => Err("missing field `n` or `n_range`".into()),
        }
    }
}

/// Check names accepted by `verify`.
pub const CHECKS: &[&str] = &[
    "monotone",
    "bounds",
    "additivity",
    "difference",
    "monotone_limit",
    "countable_additivity",
    "mu_infinity",
    "oracle_agreement",
];

/// A spec estimated over a range of levels; also the `estimate` config.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceCheck {
    pub spec: PathSetSpec,
    #[serde(default = "one")]
    pub horizon: f64,
    pub n: Option<u32>,
    pub n_range: Option<[u32; 2]>,
}

impl SequenceCheck {
    pub fn levels(&self) -> Result<Vec<u32>, String> {
        Levels {
            n: self.n,
            n_range: self.n_range,
        }
        .list()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditivityCheck {
    pub a: PathSetSpec,
    pub b: PathSetSpec,
    #[serde(default = "one")]
    pub horizon: f64,
    pub n: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferenceCheck {
    pub m_inner: f64,
    pub m_outer: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    pub n: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitCheck {
    pub family: NestedFamily,
    #[serde(default = "one")]
    pub horizon: f64,
    pub n: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionCheck {
    pub radii: Vec<f64>,
    #[serde(default = "one")]
    pub horizon: f64,
    pub n: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfinityCheck {
    pub alpha: f64,
    pub lambda: f64,
    pub horizons: Vec<usize>,
    pub level_per_unit: u32,
}

fn default_terms() -> usize {
    50
}

fn default_rel_tol() -> f64 {
    0.01
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheck {
    pub m: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Level compared with the reflection series.
    pub n: u32,
    /// Levels (at most 2) compared with quadrature.
    #[serde(default)]
    pub quadrature_levels: Vec<u32>,
    #[serde(default = "default_terms")]
    pub terms: usize,
    /// Relative tolerance against the series, combined with 3 SE.
    #[serde(default = "default_rel_tol")]
    pub relative_tolerance: f64,
    /// Optional random-walk tie-breaker.
    pub walk_steps: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "sweep", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Sup-ball bounds over a grid of radii.
    SupballBound {
        #[serde(default = "one")]
        horizon: f64,
        m: Vec<f64>,
        n: u32,
    },
    /// `ψ(λ)` and the Hölder-ball bounds over a grid of `λ`.
    HolderBound {
        alpha: f64,
        #[serde(default = "one")]
        horizon: f64,
        lambda: Vec<f64>,
        n: u32,
    },
    /// `μ_r` estimates over a grid of horizons.
    MuR {
        alpha: f64,
        lambda: f64,
        horizons: Vec<usize>,
        level_per_unit: u32,
    },
}
