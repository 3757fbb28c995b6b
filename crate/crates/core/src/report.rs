//! JSON reports written by the command-line tool. Every report carries
//! `schema_version: 1`; wall-clock timings live under `timings_ms` keys so
//! that reproducibility checks can drop them.

use serde::Serialize;
use serde_json::Value;

use crate::harness::diagnostics::DiagnosticReport;
use crate::harness::matching::MatchReport;
use crate::recovery::{LiftSummary, PhaseTimings, RecoveryConfig, RecoveryResult, RecoveryStatus, RoundRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct DecomposeReport {
    pub schema_version: u32,
    pub dim: usize,
    pub rank: usize,
    pub seed: u64,
    pub status: RecoveryStatus,
    pub n_recovered: usize,
    pub matvecs: usize,
    pub config: RecoveryConfig,
    pub lift: LiftSummary,
    pub rounds: Vec<RoundRecord>,
    pub components_file: Option<String>,
    pub timings_ms: PhaseTimings,
}

impl DecomposeReport {
    pub fn new(result: &RecoveryResult, rank: usize, cfg: &RecoveryConfig, components_file: Option<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dim: result.components.dim(),
            rank,
            seed: cfg.seed,
            status: result.status,
            n_recovered: result.components.len(),
            matvecs: result.matvecs(),
            config: cfg.clone(),
            lift: result.lift.clone(),
            rounds: result.rounds.clone(),
            components_file,
            timings_ms: result.timings.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    #[serde(rename = "match")]
    pub matching: MatchReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub diagnostics: DiagnosticReport,
}

/// Copy of `v` with every `timings_ms` entry removed.
pub fn strip_timings(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(map.iter().filter(|(k, _)| k.as_str() != "timings_ms").map(|(k, x)| (k.clone(), strip_timings(x))).collect()),
        Value::Array(xs) => Value::Array(xs.iter().map(strip_timings).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn timings_removed_at_any_depth() {
        let v = json!({"a": 1, "timings_ms": {"x": 2}, "b": [{"timings_ms": 3, "c": 4}]});
        assert_eq!(strip_timings(&v), json!({"a": 1, "b": [{"c": 4}]}));
    }
}
