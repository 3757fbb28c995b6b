//! The staged lifted operator against its dense definition.

use std::time::Instant;

use nalgebra::DMatrix;
use overcomplete::harness::sample::sample_components;
use overcomplete::lifting::SymmetricOperator;
use overcomplete::netcontract::{dense_quadsum_oracle, LiftedOperator};
use overcomplete::tensor::build_symmetric_tensor;

fn main() -> overcomplete::Result<()> {
    let (d, n) = (5, 7);
    let a = sample_components(d, n, 11)?;
    let t = build_symmetric_tensor(&a)?;
    let op = LiftedOperator::new(&t);

    let x = DMatrix::from_fn(d * d * d, 3, |i, j| ((i + 17 * j) as f64).sin());
    let staged = op.apply_block(&x)?;
    let dense = dense_quadsum_oracle(&a)? * &x;
    println!("d={d}, n={n}: relative difference {:.2e}", (&staged - &dense).norm() / dense.norm());

    // matrix-free cost grows like d^6 per column
    for d in [8, 12, 16] {
        let t = build_symmetric_tensor(&sample_components(d, d, 1)?)?;
        let op = LiftedOperator::new(&t);
        let x = DMatrix::from_element(d * d * d, 8, 1.0);
        let clock = Instant::now();
        op.apply_block(&x)?;
        println!("d={d:>2}: 8 columns in {:>7.1} ms", clock.elapsed().as_secs_f64() * 1e3);
    }
    Ok(())
}
