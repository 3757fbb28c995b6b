//! The isotropic transform and the separation diagnostics.

use overcomplete::harness::diagnostics::diagnose;
use overcomplete::harness::isotropic::IsotropicTransform;
use overcomplete::harness::sample::sample_components;

fn main() -> overcomplete::Result<()> {
    let r = IsotropicTransform::new(8)?;
    let norm = r.dense().singular_values().max();
    println!("d=8: c = {:.6}, ||R|| = {norm:.12}, ||R(vv) - vv||^2 for unit v = {:.6}", r.c, r.square_defect(1.0));

    for (d, n) in [(16, 16), (16, 24), (32, 56)] {
        let a = sample_components(d, n, 1)?;
        let rep = diagnose(&a)?;
        println!("d={d} n={n}:");
        for c in &rep.conditions {
            println!("  {:>2} {:<38} {:>10.4} vs {:>8.4} {}", c.id, c.name, c.value, c.bound, if c.ok { "ok" } else { "exceeds" });
        }
    }
    Ok(())
}
