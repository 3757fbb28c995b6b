//! Simultaneous diagonalisation on an undercomplete instance.

use overcomplete::harness::jennrich::jennrich;
use overcomplete::harness::matching::match_and_score;
use overcomplete::harness::sample::sample_components;
use overcomplete::tensor::build_symmetric_tensor;

fn main() -> overcomplete::Result<()> {
    let (d, n) = (12, 8);
    let a = sample_components(d, n, 3)?;
    let t = build_symmetric_tensor(&a)?;
    let r = jennrich(&t, n, 0)?;
    let m = match_and_score(&a, &r.components, false);
    println!("condition number {:.2}, min eigenvalue gap {:.3}", r.condition_number, r.min_eigen_gap);
    println!("min correlation {:.12}, max error {:.2e}", m.min_correlation(), m.max_error);
    Ok(())
}
