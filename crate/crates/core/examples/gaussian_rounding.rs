//! One rounding round on the exact sixth-order object of an orthonormal
//! instance, then on a noisy overcomplete lift.

use overcomplete::harness::sample::{orthonormal_components, sample_components};
use overcomplete::lifting::{lift, EigConfig};
use overcomplete::netcontract::dense_cube_projector;
use overcomplete::rounding::{rounding_round, RoundingConfig};
use overcomplete::tensor::{build_symmetric_tensor, ComponentSet};
use overcomplete::truncation::{truncate_both, TruncatedLift};

fn best_match(a: &ComponentSet, b: &[f64]) -> f64 {
    a.as_matrix().column_iter().map(|c| c.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()).fold(f64::MIN, f64::max)
}

fn main() -> overcomplete::Result<()> {
    let a = orthonormal_components(6, 6, 1)?;
    let t = build_symmetric_tensor(&a)?;
    let exact = TruncatedLift::from_dense(6, &dense_cube_projector(&a)?)?;
    let out = rounding_round(&exact, &t, 6, &ComponentSet::empty(6), &RoundingConfig::default(), 5)?;
    println!("orthonormal d=6: {} candidates from {} trials", out.candidates.len(), out.stats.trials);
    for c in &out.candidates {
        println!("  score {:.6}  best correlation {:.9}", c.score, best_match(&a, &c.vector));
    }

    let (d, n) = (10, 14);
    let a = sample_components(d, n, 4)?;
    let t = build_symmetric_tensor(&a)?;
    let l = lift(&t, n, &EigConfig::for_tensor_dim(d, 1))?;
    let (tl, _) = truncate_both(&TruncatedLift::from(&l))?;
    let out = rounding_round(&tl, &t, n, &ComponentSet::empty(d), &RoundingConfig::default(), 5)?;
    println!("overcomplete d={d} n={n}: {} candidates, stats {:?}", out.candidates.len(), out.stats);
    let mut corr: Vec<f64> = out.candidates.iter().map(|c| best_match(&a, &c.vector)).collect();
    corr.sort_by(|x, y| y.total_cmp(x));
    println!("  best correlations {corr:.3?}");
    Ok(())
}
