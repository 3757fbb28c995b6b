//! Timing grid over dimension and overcompleteness ratio.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::matching::match_and_score;
use crate::harness::sample::sample_components;
use crate::recovery::{decompose, RecoveryConfig};
use crate::seed;
use crate::tensor::build_symmetric_tensor;

/// Cells of the grid in row-major order (`d` outer, ratio inner).
#[derive(Clone, Debug, PartialEq)]
pub struct BenchGrid {
    pub dims: Vec<usize>,
    pub ratios: Vec<f64>,
}

impl BenchGrid {
    /// Parses `d=8,16,32;ratio=1.0,1.25,1.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut dims = None;
        let mut ratios = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, vals) = part.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("grid term {part:?} has no '='")))?;
            let items = vals.split(',').map(str::trim).filter(|v| !v.is_empty());
            match key.trim() {
                "d" => {
                    dims = Some(
                        items
                            .map(|v| v.parse::<usize>().map_err(|e| Error::InvalidArgument(format!("bad dimension {v:?}: {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "ratio" => {
                    ratios = Some(
                        items
                            .map(|v| v.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad ratio {v:?}: {e}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                other => return Err(Error::InvalidArgument(format!("unknown grid key {other:?}"))),
            }
        }
        let dims = dims.filter(|v| !v.is_empty()).ok_or_else(|| Error::InvalidArgument("grid needs d=...".into()))?;
        let ratios = ratios.filter(|v| !v.is_empty()).ok_or_else(|| Error::InvalidArgument("grid needs ratio=...".into()))?;
        if dims.contains(&0) || ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("dimensions and ratios must be positive".into()));
        }
        Ok(Self { dims, ratios })
    }

    pub fn cells(&self) -> Vec<(usize, f64)> {
        self.dims.iter().flat_map(|&d| self.ratios.iter().map(move |&r| (d, r))).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub d: usize,
    pub n: usize,
    pub ratio: f64,
    pub seed: u64,
    pub status: String,
    pub recovered: usize,
    pub above_0_99: usize,
    pub max_error: f64,
    pub matvecs: usize,
    pub lift_ms: f64,
    pub truncate_ms: f64,
    pub round_ms: f64,
    pub boost_ms: f64,
    pub peel_ms: f64,
    pub total_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "d,n,ratio,seed,status,recovered,above_0_99,max_error,matvecs,lift_ms,truncate_ms,round_ms,boost_ms,peel_ms,total_ms,error";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{}",
            self.d,
            self.n,
            self.ratio,
            self.seed,
            self.status,
            self.recovered,
            self.above_0_99,
            self.max_error,
            self.matvecs,
            self.lift_ms,
            self.truncate_ms,
            self.round_ms,
            self.boost_ms,
            self.peel_ms,
            self.total_ms,
            self.error.as_deref().unwrap_or("").replace(',', ";")
        )
    }
}

fn run_cell(d: usize, ratio: f64, base: &RecoveryConfig, index: usize) -> BenchRow {
    let n = ((ratio * d as f64).round() as usize).max(1);
    let cell_seed = seed::derive(base.seed, "bench", index as u64);
    let mut row = BenchRow {
        d,
        n,
        ratio,
        seed: cell_seed,
        status: "error".into(),
        recovered: 0,
        above_0_99: 0,
        max_error: f64::NAN,
        matvecs: 0,
        lift_ms: 0.0,
        truncate_ms: 0.0,
        round_ms: 0.0,
        boost_ms: 0.0,
        peel_ms: 0.0,
        total_ms: 0.0,
        error: None,
    };
    let outcome = (|| {
        let truth = sample_components(d, n, cell_seed)?;
        let t = build_symmetric_tensor(&truth)?;
        let cfg = RecoveryConfig { seed: cell_seed, ..base.clone() };
        let r = decompose(&t, n, &cfg)?;
        Ok::<_, Error>((truth, r))
    })();
    match outcome {
        Ok((truth, r)) => {
            let m = match_and_score(&truth, &r.components, false);
            row.status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            row.recovered = r.components.len();
            row.above_0_99 = m.above_0_99;
            row.max_error = m.max_error;
            row.matvecs = r.matvecs();
            row.lift_ms = r.timings.lift_ms;
            row.truncate_ms = r.timings.truncate_ms;
            row.round_ms = r.timings.round_ms;
            row.boost_ms = r.timings.boost_ms;
            row.peel_ms = r.timings.peel_ms;
            row.total_ms = r.timings.total_ms;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every cell (in parallel when threads are available) and returns the
/// rows in grid order. A failing cell is recorded in its row.
pub fn run_bench(grid: &BenchGrid, base: &RecoveryConfig) -> Vec<BenchRow> {
    grid.cells().into_par_iter().enumerate().map(|(i, (d, r))| run_cell(d, r, base, i)).collect()
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BenchRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grid() {
        let g = BenchGrid::parse("d=8,16,32;ratio=1.0,1.25,1.5").unwrap();
        assert_eq!(g.dims, vec![8, 16, 32]);
        assert_eq!(g.cells().len(), 9);
        assert_eq!(g.cells()[1], (8, 1.25));
        assert!(BenchGrid::parse("d=8").is_err());
        assert!(BenchGrid::parse("d=x;ratio=1").is_err());
        assert!(BenchGrid::parse("q=1;d=2;ratio=1").is_err());
    }

    #[test]
    fn tiny_grid_runs() {
        let g = BenchGrid::parse("d=3;ratio=1.0").unwrap();
        let rows = run_bench(&g, &RecoveryConfig::new(1));
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_none(), "{:?}", rows[0].error);
        assert_eq!(to_csv(&rows).lines().count(), 2);
    }
}
