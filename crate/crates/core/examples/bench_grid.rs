//! A small timing grid. Pass a grid string to override, e.g.
//! `cargo run --release --example bench_grid -- "d=6,8;ratio=1.0,1.5"`.

use overcomplete::harness::bench::{run_bench, to_csv, BenchGrid};
use overcomplete::recovery::RecoveryConfig;

fn main() -> overcomplete::Result<()> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "d=6,8,10;ratio=1.0,1.25".to_string());
    let grid = BenchGrid::parse(&spec)?;
    let rows = run_bench(&grid, &RecoveryConfig::new(1));
    print!("{}", to_csv(&rows));
    Ok(())
}
