//! Behaviour of the individual stages on instances large enough to be
//! overcomplete.

use overcomplete::harness::matching::match_and_score;
use overcomplete::harness::sample::{orthonormal_components, sample_components};
use overcomplete::lifting::{lift, EigConfig};
use overcomplete::netcontract::cube_matrix;
use overcomplete::recovery::{decompose, RecoveryConfig, RecoveryStatus};
use overcomplete::rounding::{rounding_round, RoundingConfig};
use overcomplete::tensor::{build_symmetric_tensor, ComponentSet};
use overcomplete::truncation::{truncate_both, TruncatedLift};

#[test]
fn truncation_at_d16_keeps_norms_and_distance() {
    let (d, n) = (16, 24);
    let a = sample_components(d, n, 1).unwrap();
    let t = build_symmetric_tensor(&a).unwrap();
    let l = lift(&t, n, &EigConfig::for_tensor_dim(d, 3)).unwrap();
    let raw = TruncatedLift::from(&l);
    let (tl, s) = truncate_both(&raw).unwrap();
    assert!((0.9..=1.0 + 1e-6).contains(&s.norm_a), "A {}", s.norm_a);
    assert!((0.9..=1.0 + 1e-6).contains(&s.norm_b), "B {}", s.norm_b);
    assert!(!s.a_bound_slipped);
    let before = raw.distance_to_cubes(&a);
    let after = tl.distance_to_cubes(&a);
    assert!(after <= 3.0 * before, "{after} vs {before}");

    let out = rounding_round(&tl, &t, n, &ComponentSet::empty(d), &RoundingConfig::default(), 11).unwrap();
    assert!(out.candidates.len() <= n);
    for c in &out.candidates {
        assert!(c.score >= 0.6);
    }
}

#[test]
fn lift_eigenvectors_are_orthonormal() {
    let (d, n) = (8, 10);
    let a = sample_components(d, n, 5).unwrap();
    let l = lift(&build_symmetric_tensor(&a).unwrap(), n, &EigConfig::for_tensor_dim(d, 1)).unwrap();
    let g = l.u.tr_mul(&l.u);
    assert!((g - nalgebra::DMatrix::identity(n, n)).amax() < 1e-10);
    for w in l.eigvals.as_slice().windows(2) {
        assert!(w[0].abs() >= w[1].abs());
    }
    assert_eq!(cube_matrix(&a).ncols(), n);
}

#[test]
fn decompose_is_deterministic_and_complete_on_orthonormal() {
    let a = orthonormal_components(6, 6, 8).unwrap();
    let t = build_symmetric_tensor(&a).unwrap();
    let cfg = RecoveryConfig::new(4);
    let r1 = decompose(&t, 6, &cfg).unwrap();
    let r2 = decompose(&t, 6, &cfg).unwrap();
    assert_eq!(r1.status, RecoveryStatus::Complete);
    assert_eq!(r1.components, r2.components);
    assert!(match_and_score(&a, &r1.components, false).min_correlation() > 1.0 - 1e-9);
}

#[test]
fn decompose_reports_partial_recovery() {
    let (d, n) = (8, 12);
    let a = sample_components(d, n, 2).unwrap();
    let t = build_symmetric_tensor(&a).unwrap();
    let r = decompose(&t, n, &RecoveryConfig::new(2)).unwrap();
    assert!(r.components.len() <= n);
    assert!(!r.rounds.is_empty());
    if r.status != RecoveryStatus::Complete {
        assert!(r.components.len() < n);
    }
    let admitted: usize = r.rounds.iter().map(|x| x.admitted_after_boost).sum();
    assert_eq!(admitted, r.components.len());
}
