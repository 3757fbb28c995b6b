//! Full pipeline on a random overcomplete instance.
//!
//! cargo run --release --example decompose -- 16 24 1

use overcomplete::harness::matching::match_and_score;
use overcomplete::harness::sample::sample_components;
use overcomplete::recovery::{decompose, RecoveryConfig};
use overcomplete::tensor::build_symmetric_tensor;

fn main() -> overcomplete::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let d = *args.first().unwrap_or(&12) as usize;
    let n = *args.get(1).unwrap_or(&16) as usize;
    let seed = *args.get(2).unwrap_or(&1);

    let truth = sample_components(d, n, seed)?;
    let t = build_symmetric_tensor(&truth)?;
    let result = decompose(&t, n, &RecoveryConfig::new(seed))?;

    println!("d = {d}, n = {n}, status = {:?}", result.status);
    println!(
        "lift: lambda_n = {:.4}, lambda_n+1 = {:.4?}, {} iterations, converged = {}",
        result.lift.eigvals[n - 1],
        result.lift.next_eigval,
        result.lift.stats.iterations,
        result.lift.stats.converged
    );
    for r in &result.rounds {
        println!(
            "round {}: target {}, {} trials, {} candidates, {} kept after boosting, norms A {:.4} B {:.4}",
            r.round, r.target, r.trials.trials, r.candidates, r.admitted_after_boost, r.truncation.norm_a, r.truncation.norm_b
        );
    }
    let m = match_and_score(&truth, &result.components, false);
    println!(
        "recovered {} / {n}: {} at >= 0.9, {} at >= 0.99, max error {:.3}",
        result.components.len(),
        m.above_0_9,
        m.above_0_99,
        m.max_error
    );
    let mut sorted = m.correlations.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    println!("correlations: {:.3?}", sorted);
    println!("time: {:.0} ms total, {:.0} ms in the lift", result.timings.total_ms, result.timings.lift_ms);
    Ok(())
}
