//! JSON and CSV report documents.
//!
//! Every JSON document carries `"schema": "wiener-meter/1"`. Floats are
//! written in shortest round-trip form, so a document is a pure function of
//! its inputs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gaussian::SeedSpec;
use crate::measure::{BoundCheck, EstimateResult};
use crate::REPORT_SCHEMA;

fn schema() -> String {
    REPORT_SCHEMA.to_string()
}

/// One named pass/fail verdict with the number behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            value,
            tolerance,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// A single estimate with the bounds and verdicts attached to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(default = "schema")]
    pub schema: String,
    pub spec: Value,
    pub horizon: f64,
    pub n: Option<u32>,
    #[serde(rename = "N")]
    pub samples: u64,
    pub seed: SeedSpec,
    pub hits: u64,
    pub p_hat: f64,
    pub se: f64,
    pub ci: [f64; 2],
    pub bounds: Vec<BoundCheck>,
    pub verdicts: Vec<Verdict>,
}

impl EstimateReport {
    pub fn new(spec: Value, est: &EstimateResult) -> Self {
        Self {
            schema: schema(),
            spec,
            horizon: est.horizon,
            n: est.level,
            samples: est.samples,
            seed: est.seed,
            hits: est.hits,
            p_hat: est.p_hat,
            se: est.se,
            ci: [est.ci_low, est.ci_high],
            bounds: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    /// All bounds and verdicts pass.
    pub fn passed(&self) -> bool {
        self.bounds.iter().all(|b| b.pass) && self.verdicts.iter().all(|v| v.passed)
    }
}

/// Top-level document written by the command line tool: the full input
/// configuration next to the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(default = "schema")]
    pub schema: String,
    pub command: String,
    pub config: Value,
    pub passed: bool,
    pub results: Value,
}

impl Document {
    pub fn new(command: impl Into<String>, config: Value, passed: bool, results: Value) -> Self {
        Self {
            schema: schema(),
            command: command.into(),
            config,
            passed,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// CSV with one row per estimate:
/// `horizon,level,points,samples,hits,p_hat,se,ci_low,ci_high`.
pub fn estimates_csv(estimates: &[EstimateResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "horizon", "level", "points", "samples", "hits", "p_hat", "se", "ci_low", "ci_high",
    ])
    .expect("in-memory write");
    for e in estimates {
        w.write_record([
            e.horizon.to_string(),
            e.level.map_or_else(String::new, |n| n.to_string()),
            e.points.to_string(),
            e.samples.to_string(),
            e.hits.to_string(),
            e.p_hat.to_string(),
            e.se.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
        ])
        .expect("in-memory write");
    }
    table_string(w)
}

/// Generic CSV table from a header and rows of floats.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))
            .expect("in-memory write");
    }
    table_string(w)
}

fn table_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
