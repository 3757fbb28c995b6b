//! Tensor power iteration from warm starts.

use overcomplete::harness::sample::{perturb_to_correlation, sample_components};
use overcomplete::recovery::power_iterate;
use overcomplete::tensor::build_symmetric_tensor;

fn main() -> overcomplete::Result<()> {
    for (d, n) in [(16, 8), (16, 24), (32, 24)] {
        let a = sample_components(d, n, 2)?;
        let t = build_symmetric_tensor(&a)?;
        let target = a.get(0).into_owned();
        print!("d={d:>2} n={n:>2}:");
        for rho in [0.9, 0.99] {
            let start = perturb_to_correlation(&target, rho, 1);
            let out = power_iterate(&t, &start, 12)?;
            print!("  {rho} -> {:.4}", out.vector.dot(&target));
        }
        println!();
    }
    Ok(())
}
