//! Property tests for the invariants of the pipeline.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use overcomplete::harness::matching::match_and_score;
use overcomplete::harness::sample::{orthonormal_components, sample_components};
use overcomplete::io;
use overcomplete::lifting::SymmetricOperator;
use overcomplete::netcontract::{dense_cube_projector, LiftedOperator};
use overcomplete::rounding::{rounding_round, RoundingConfig};
use overcomplete::tensor::{build_symmetric_tensor, ComponentSet};
use overcomplete::truncation::{dense_flatten, truncate_both, RectFlattening, TruncatedLift};

fn block(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| (((i * 31 + j * 17) as u64 ^ seed) as f64 * 0.618).sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lifted_operator_is_symmetric_and_linear(d in 2usize..6, n in 1usize..7, seed in any::<u64>()) {
        let a = sample_components(d, n, seed).unwrap();
        let op = LiftedOperator::new(&build_symmetric_tensor(&a).unwrap());
        let x = block(d * d * d, 2, seed);
        let mx = op.apply_block(&x).unwrap();
        let scale = mx.norm().max(1.0);
        let lhs = x.column(0).dot(&mx.column(1));
        let rhs = x.column(1).dot(&mx.column(0));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale * x.norm());
        let comb = x.column(0) * 2.5 - x.column(1);
        let mc = op.apply_block(&DMatrix::from_columns(&[comb])).unwrap();
        let want = mx.column(0) * 2.5 - mx.column(1);
        prop_assert!((mc.column(0) - want).norm() <= 1e-10 * scale);
    }

    #[test]
    fn lifted_operator_is_psd_on_orthonormal_inputs(d in 2usize..5, seed in any::<u64>()) {
        let n = 1 + (seed as usize % d);
        let a = orthonormal_components(d, n, seed).unwrap();
        let op = LiftedOperator::new(&build_symmetric_tensor(&a).unwrap());
        let x = block(d * d * d, 3, seed);
        let mx = op.apply_block(&x).unwrap();
        for j in 0..3 {
            prop_assert!(x.column(j).dot(&mx.column(j)) >= -1e-10 * x.column(j).norm_squared());
        }
    }

    #[test]
    fn truncation_bounds_and_shrinks(seed in any::<u64>(), scale in 0.1f64..4.0) {
        let d = 2;
        let x = block(8, 8, seed) * scale;
        let l = TruncatedLift::from_dense(d, &x).unwrap();
        let (t, s) = truncate_both(&l).unwrap();
        prop_assert!(s.norm_a <= 1.0 + 1e-6 && s.norm_b <= 1.0 + 1e-6);
        let dense = t.to_dense().unwrap();
        prop_assert!(dense.norm() <= x.norm() + 1e-10);
        for w in [RectFlattening::A, RectFlattening::B] {
            prop_assert!(dense_flatten(&dense, d, w).singular_values().max() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn matching_is_injective_and_bounded(d in 2usize..6, n in 1usize..6, m in 0usize..7, seed in any::<u64>()) {
        let a = sample_components(d, n, seed).unwrap();
        let b = if m == 0 { ComponentSet::empty(d) } else { sample_components(d, m, seed ^ 0x55).unwrap() };
        let r = match_and_score(&a, &b, false);
        let mut used: Vec<usize> = r.assignment.iter().flatten().copied().collect();
        let k = used.len();
        used.sort();
        used.dedup();
        prop_assert_eq!(used.len(), k);
        prop_assert_eq!(k, n.min(m));
        prop_assert!(r.correlations.iter().all(|c| c.abs() <= 1.0 + 1e-12));
        prop_assert!(r.above_0_99 <= r.above_0_9);
    }

    #[test]
    fn component_files_roundtrip(d in 1usize..8, n in 1usize..8, seed in any::<u64>()) {
        let a = sample_components(d, n, seed).unwrap();
        let mut buf = Vec::new();
        io::write_components(&mut buf, &a).unwrap();
        prop_assert_eq!(io::read_components(&mut buf.as_slice()).unwrap(), a.clone());
        let t = build_symmetric_tensor(&a).unwrap();
        let mut buf = Vec::new();
        io::write_tensor(&mut buf, &t).unwrap();
        prop_assert_eq!(io::read_tensor(&mut buf.as_slice()).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rounding_candidates_are_distinct_unit_and_accepted(seed in any::<u64>()) {
        let d = 4;
        let a = sample_components(d, 5, seed).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let lift = TruncatedLift::from_dense(d, &dense_cube_projector(&a).unwrap()).unwrap();
        let cfg = RoundingConfig { max_trials: Some(40), ..RoundingConfig::default() };
        let out = rounding_round(&lift, &t, 5, &ComponentSet::empty(d), &cfg, seed).unwrap();
        let again = rounding_round(&lift, &t, 5, &ComponentSet::empty(d), &cfg, seed).unwrap();
        prop_assert_eq!(out.stats.clone(), again.stats);
        let vs: Vec<DVector<f64>> = out.candidates.iter().map(|c| c.as_dvector()).collect();
        for (i, v) in vs.iter().enumerate() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            prop_assert!(out.candidates[i].score >= cfg.accept_threshold);
            for w in &vs[..i] {
                prop_assert!(v.dot(w).abs() < cfg.dup_threshold);
            }
        }
        let s = &out.stats;
        prop_assert_eq!(s.trials, s.accepted + s.rejected_score + s.rejected_gap + s.rejected_duplicate + s.zero_contraction);
    }
}
