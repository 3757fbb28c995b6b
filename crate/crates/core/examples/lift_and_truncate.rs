//! Rank-n lift followed by spectral truncation of both flattenings.

use overcomplete::harness::sample::sample_components;
use overcomplete::lifting::{lift, EigConfig};
use overcomplete::tensor::build_symmetric_tensor;
use overcomplete::truncation::{truncate_both, TruncatedLift};

fn main() -> overcomplete::Result<()> {
    let (d, n) = (10, 14);
    let a = sample_components(d, n, 2)?;
    let t = build_symmetric_tensor(&a)?;

    let l = lift(&t, n, &EigConfig::for_tensor_dim(d, 7))?;
    println!("top eigenvalues {:.3?}", l.eigvals.as_slice());
    println!(
        "lambda_n = {:.3}, next = {:.3?}, converged = {} after {} iterations",
        l.eigvals[n - 1],
        l.next_eigval,
        l.stats.converged,
        l.stats.iterations
    );

    let raw = TruncatedLift::from(&l);
    let (tl, summary) = truncate_both(&raw)?;
    for r in &summary.records {
        println!("flattening {}: norm before {:.4}, {} directions clipped", r.which.name(), r.norm_before, r.clipped);
    }
    println!("after: A {:.6}, B {:.6}", summary.norm_a, summary.norm_b);
    println!("distance to sum of sixth powers: before {:.3}, after {:.3}", raw.distance_to_cubes(&a), tl.distance_to_cubes(&a));
    Ok(())
}
