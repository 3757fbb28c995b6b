//! Implementations behind the `overcomplete` binary. Each returns whether
//! the run was complete or partial; the binary maps that to exit codes
//! 0 and 2 and any error to 1.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::harness::bench::{run_bench, to_csv, BenchGrid};
use crate::harness::diagnostics::diagnose;
use crate::harness::jennrich::jennrich;
use crate::harness::matching::match_and_score;
use crate::harness::sample::sample_components;
use crate::io;
use crate::recovery::{decompose, RecoveryConfig, RecoveryStatus};
use crate::report::{DecomposeReport, DiagReport, EvalReport, SCHEMA_VERSION};
use crate::tensor::build_symmetric_tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Complete => 0,
            Outcome::Partial => 2,
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn gen(dim: usize, rank: usize, seed: u64, out: &Path, tensor_out: Option<&Path>) -> Result<Outcome> {
    let a = sample_components(dim, rank, seed)?;
    io::save_components(out, &a)?;
    if let Some(p) = tensor_out {
        io::save_tensor(p, &build_symmetric_tensor(&a)?)?;
    }
    Ok(Outcome::Complete)
}

pub struct DecomposeArgs<'a> {
    pub tensor: &'a Path,
    pub rank: usize,
    pub seed: u64,
    pub out: &'a Path,
    pub report: &'a Path,
    pub budget_scale: Option<f64>,
    pub accept_threshold: Option<f64>,
    pub dup_threshold: Option<f64>,
}

pub fn decompose_file(args: &DecomposeArgs) -> Result<Outcome> {
    let t = io::load_tensor(args.tensor)?;
    let mut cfg = RecoveryConfig::new(args.seed);
    if let Some(c) = args.budget_scale {
        cfg.rounding.budget_scale = c;
    }
    if let Some(x) = args.accept_threshold {
        cfg.rounding.accept_threshold = x;
    }
    if let Some(x) = args.dup_threshold {
        cfg.rounding.dup_threshold = x;
    }
    let r = decompose(&t, args.rank, &cfg)?;
    io::save_components(args.out, &r.components)?;
    let file = args.out.file_name().map(|f| f.to_string_lossy().into_owned());
    write_json(args.report, &DecomposeReport::new(&r, args.rank, &cfg, file))?;
    Ok(if r.status == RecoveryStatus::Complete { Outcome::Complete } else { Outcome::Partial })
}

pub fn eval(truth: &Path, est: &Path, report: &Path) -> Result<Outcome> {
    let a = io::load_components(truth)?;
    let b = io::load_components(est)?;
    if a.dim() != b.dim() {
        return Err(crate::Error::Shape(format!("truth has dimension {}, estimate {}", a.dim(), b.dim())));
    }
    let m = match_and_score(&a, &b, false);
    let partial = m.unmatched_truth > 0;
    write_json(report, &EvalReport { schema_version: SCHEMA_VERSION, matching: m })?;
    Ok(if partial { Outcome::Partial } else { Outcome::Complete })
}

/// Returns the report as pretty JSON.
pub fn diag(components: &Path) -> Result<(String, Outcome)> {
    let a = io::load_components(components)?;
    let r = diagnose(&a)?;
    let ok = r.all_ok();
    let s = serde_json::to_string_pretty(&DiagReport { schema_version: SCHEMA_VERSION, diagnostics: r })?;
    Ok((s, if ok { Outcome::Complete } else { Outcome::Partial }))
}

/// Returns the report as pretty JSON and optionally writes the components.
pub fn oracle_jennrich(tensor: &Path, rank: usize, seed: u64, out: Option<&Path>) -> Result<String> {
    let t = io::load_tensor(tensor)?;
    let r = jennrich(&t, rank, seed)?;
    if let Some(p) = out {
        io::save_components(p, &r.components)?;
    }
    Ok(serde_json::to_string_pretty(&r.report())?)
}

pub fn bench(grid: &str, seed: u64, out: &Path, lift_iters: Option<usize>) -> Result<Outcome> {
    let grid = BenchGrid::parse(grid)?;
    let mut cfg = RecoveryConfig::new(seed);
    cfg.lift_iters = lift_iters;
    let rows = run_bench(&grid, &cfg);
    fs::write(out, to_csv(&rows))?;
    let json_path = out.with_extension("json");
    write_json(&json_path, &serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows }))?;
    Ok(if rows.iter().all(|r| r.error.is_none()) { Outcome::Complete } else { Outcome::Partial })
}
