//! Gaussian rounding: extract component candidates from a truncated lift.
//!
//! One trial draws `g ~ N(0, I_{d^2})`, contracts the lift's first mode
//! pair against it to get a `d^2 x d^2` matrix, takes its top right
//! singular vector, refolds that into a `d x d` matrix and reads off a
//! candidate from its top singular vectors. Trials are independent and run
//! in batches; admission into the candidate set happens in trial order, so
//! the outcome depends only on the round seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::{eval3, reshape_vec_to_matrix, ComponentSet, Tensor3};
use crate::truncation::TruncatedLift;

/// Rounding parameters. Thresholds are on `T(b,b,b)` for unit `b`
/// (`accept`) and on `|<b, b'>|` between candidates (`duplicate`).
#[derive(Clone, Debug, Serialize)]
pub struct RoundingConfig {
    /// Trial budget is `ceil(budget_scale * d^2 * ceil(ln d))` unless
    /// `max_trials` is set.
    pub budget_scale: f64,
    pub max_trials: Option<usize>,
    pub accept_threshold: f64,
    pub dup_threshold: f64,
    /// A round stops once `ceil(target_fraction * n_target)` candidates are
    /// admitted.
    pub target_fraction: f64,
    pub power_iters: usize,
    pub power_tol: f64,
    /// Minimum `sigma1 / sigma2`.
    pub min_gap_ratio: f64,
    pub batch: usize,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            budget_scale: 4.0,
            max_trials: None,
            accept_threshold: 0.6,
            dup_threshold: 0.99,
            target_fraction: 0.99,
            power_iters: 100,
            power_tol: 1e-7,
            min_gap_ratio: 1.0 + 1e-6,
            batch: 16,
        }
    }
}

impl RoundingConfig {
    pub fn trial_budget(&self, d: usize) -> usize {
        if let Some(m) = self.max_trials {
            return m;
        }
        let ln = (d.max(2) as f64).ln().ceil();
        (self.budget_scale * (d * d) as f64 * ln).ceil().max(1.0) as usize
    }
}

/// `M_g[P2, P3] = sum_{P1} g[P1] X[P1, P2, P3]`.
pub fn gaussian_contract(l: &TruncatedLift, g: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = l.tensor_dim();
    let d2 = d * d;
    if g.len() != d2 {
        return Err(Error::Shape(format!("contraction vector has length {}, expected {d2}", g.len())));
    }
    let k = l.factor_rank();
    // ut[c, i3] = sum_{P1} g[P1] u_c[(P1, i3)]
    let gu = l.u_tilde().tr_mul(g);
    let ut = DMatrix::from_fn(k, d, |c, i3| gu[c * d + i3]);
    // m0[i3, (i4, P3)] then regrouped row-major as [(i3,i4), P3]
    let m0: DMatrix<f64> = ut.transpose() * l.v().transpose();
    let m = DMatrix::from_fn(d2, d2, |r, p3| m0[(r / d, (r % d) * d2 + p3)]);
    Ok(match l.pair_operator() {
        Some(kop) => kop.tr_mul(&m),
        None => m,
    })
}

/// Leading right singular vector of `m` and the top two singular values.
#[derive(Clone, Debug)]
pub struct TopSingular {
    pub vector: DVector<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub converged: bool,
}

fn random_unit(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Power iteration on `m^T m`, then one deflated sweep for `sigma2`.
/// Fails when `m` is zero or the gap `sigma1 / sigma2` is below
/// `min_gap_ratio`.
pub fn top_singular_vector(m: &DMatrix<f64>, iters: usize, tol: f64, min_gap_ratio: f64, rng: &mut impl Rng) -> Result<TopSingular> {
    if m.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let n = m.ncols();
    let mut x = random_unit(n, rng);
    let mut converged = false;
    for _ in 0..iters.max(1) {
        let z = m.tr_mul(&(m * &x));
        let lam = x.dot(&z);
        let zn = z.norm();
        if zn == 0.0 {
            x = random_unit(n, rng);
            continue;
        }
        let res = (&z - &x * lam).norm();
        x = z / zn;
        if res <= tol * lam.abs() {
            converged = true;
            break;
        }
    }
    let sigma1 = (m * &x).norm();

    let mut sigma2 = 0.0;
    if n > 1 {
        let mut y = random_unit(n, rng);
        y -= &x * x.dot(&y);
        for _ in 0..iters.max(1) {
            let yn = y.norm();
            if yn == 0.0 {
                break;
            }
            y /= yn;
            let mut z = m.tr_mul(&(m * &y));
            z -= &x * x.dot(&z);
            sigma2 = y.dot(&z).max(0.0).sqrt();
            y = z;
        }
    }
    if !sigma1.is_finite() || !sigma2.is_finite() {
        return Err(Error::NonFinite("singular value estimate"));
    }
    if sigma2 > 0.0 && sigma1 / sigma2 < min_gap_ratio {
        return Err(Error::NoSpectralGap { sigma1, sigma2 });
    }
    Ok(TopSingular { vector: x, sigma1, sigma2, converged })
}

/// A candidate component with its score `T(b,b,b)`.
#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub vector: Vec<f64>,
    pub score: f64,
}

impl Candidate {
    pub fn as_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.vector)
    }
}

fn lex_greater(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x > y;
        }
    }
    false
}

/// Refolds `u` into `d x d`, takes the top left and right singular vectors
/// and their negations, and keeps whichever scores highest under
/// `T(b,b,b)`. Ties (within `1e-12`) go to the lexicographically larger
/// vector. Returns `None` when the best score is below `accept`.
pub fn extract_candidate(u: &DVector<f64>, t: &Tensor3, accept: f64) -> Result<Option<Candidate>> {
    let um = reshape_vec_to_matrix(u)?;
    if um.nrows() != t.dim() {
        return Err(Error::Shape(format!("folded matrix is {0}x{0}, tensor dimension is {1}", um.nrows(), t.dim())));
    }
    let svd = um.svd(true, true);
    let top = svd.singular_values.imax();
    let vl = svd.u.as_ref().expect("requested").column(top).into_owned();
    let vr = svd.v_t.as_ref().expect("requested").row(top).transpose();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for b in [vl.clone(), -vl, vr.clone(), -vr] {
        let b = b.normalize();
        let s = eval3(t, &b);
        best = match best {
            None => Some((b, s)),
            Some((bb, bs)) => {
                if s > bs + 1e-12 || ((s - bs).abs() <= 1e-12 && lex_greater(&b, &bb)) {
                    Some((b, s))
                } else {
                    Some((bb, bs))
                }
            }
        };
    }
    let (b, score) = best.expect("four candidates");
    if !score.is_finite() {
        return Err(Error::NonFinite("candidate score"));
    }
    Ok((score >= accept).then(|| Candidate { vector: b.as_slice().to_vec(), score }))
}

/// True when `b` is within `dup_threshold` of some vector already in `set`.
pub fn is_duplicate(set: &ComponentSet, b: &DVector<f64>, dup_threshold: f64) -> bool {
    set.as_matrix().column_iter().any(|c| c.dot(b).abs() >= dup_threshold)
}

/// Per-round trial accounting.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct TrialStats {
    pub trials: usize,
    pub accepted: usize,
    pub rejected_score: usize,
    pub rejected_gap: usize,
    pub rejected_duplicate: usize,
    pub zero_contraction: usize,
    pub unconverged_power: usize,
}

/// Candidates admitted in one round.
#[derive(Clone, Debug, Serialize)]
pub struct RoundOutcome {
    pub candidates: Vec<Candidate>,
    pub stats: TrialStats,
    pub target: usize,
    /// Budget ran out before the target was met.
    pub shortfall: bool,
}

enum Trial {
    Candidate(Candidate, bool),
    LowScore(bool),
    NoGap,
    Zero,
}

fn run_trial(l: &TruncatedLift, t: &Tensor3, cfg: &RoundingConfig, round_seed: u64, idx: usize) -> Result<Trial> {
    let d2 = l.tensor_dim().pow(2);
    let mut rng = seed::stream(round_seed, "trial", idx as u64);
    let g = DVector::from_fn(d2, |_, _| StandardNormal.sample(&mut rng));
    let m = gaussian_contract(l, &g)?;
    let top = match top_singular_vector(&m, cfg.power_iters, cfg.power_tol, cfg.min_gap_ratio, &mut rng) {
        Ok(top) => top,
        Err(Error::ZeroMatrix) => return Ok(Trial::Zero),
        Err(Error::NoSpectralGap { .. }) => return Ok(Trial::NoGap),
        Err(e) => return Err(e),
    };
    Ok(match extract_candidate(&top.vector, t, cfg.accept_threshold)? {
        Some(c) => Trial::Candidate(c, top.converged),
        None => Trial::LowScore(top.converged),
    })
}

/// Runs trials until `ceil(target_fraction * n_target)` distinct candidates
/// are admitted or the budget is spent. `existing` holds vectors from
/// earlier rounds that new candidates must also differ from.
pub fn rounding_round(
    l: &TruncatedLift,
    t: &Tensor3,
    n_target: usize,
    existing: &ComponentSet,
    cfg: &RoundingConfig,
    round_seed: u64,
) -> Result<RoundOutcome> {
    let d = t.dim();
    if l.tensor_dim() != d {
        return Err(Error::Shape(format!("lift dimension {} vs tensor dimension {d}", l.tensor_dim())));
    }
    let target = ((cfg.target_fraction * n_target as f64) - 1e-9).ceil().max(0.0) as usize;
    let budget = cfg.trial_budget(d);
    let mut stats = TrialStats::default();
    let mut admitted = existing.clone();
    let mut candidates = Vec::new();
    let batch = cfg.batch.max(1);

    let mut next = 0;
    'outer: while candidates.len() < target && next < budget {
        let end = (next + batch).min(budget);
        let results: Vec<Result<Trial>> = (next..end).into_par_iter().map(|i| run_trial(l, t, cfg, round_seed, i)).collect();
        for r in results {
            stats.trials += 1;
            match r? {
                Trial::Zero => stats.zero_contraction += 1,
                Trial::NoGap => stats.rejected_gap += 1,
                Trial::LowScore(conv) => {
                    stats.unconverged_power += usize::from(!conv);
                    stats.rejected_score += 1;
                }
                Trial::Candidate(c, conv) => {
                    stats.unconverged_power += usize::from(!conv);
                    let b = c.as_dvector();
                    if is_duplicate(&admitted, &b, cfg.dup_threshold) {
                        stats.rejected_duplicate += 1;
                    } else {
                        admitted.push(&b)?;
                        candidates.push(c);
                        stats.accepted += 1;
                    }
                }
            }
            if candidates.len() >= target {
                break 'outer;
            }
        }
        next = end;
    }
    let shortfall = candidates.len() < target;
    Ok(RoundOutcome { candidates, stats, target, shortfall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sample::orthonormal_components;
    use crate::netcontract::dense_cube_projector;
    use crate::tensor::build_symmetric_tensor;
    use crate::truncation::dense_flatten;

    #[test]
    fn contraction_matches_dense_refold() {
        let d = 3;
        let mut rng = seed::rng(1);
        let x = DMatrix::from_fn(27, 27, |_, _| StandardNormal.sample(&mut rng));
        let l = TruncatedLift::from_dense(d, &x).unwrap();
        let g = DVector::from_fn(9, |_, _| StandardNormal.sample(&mut rng));
        let m = gaussian_contract(&l, &g).unwrap();
        let flat = dense_flatten(&l.to_dense().unwrap(), d, crate::truncation::RectFlattening::B);
        // flat[(P1,P3), P2]
        let want = DMatrix::from_fn(9, 9, |p2, p3| (0..9).map(|p1| g[p1] * flat[(p1 * 9 + p3, p2)]).sum::<f64>());
        assert!((m - want).amax() < 1e-10);
    }

    #[test]
    fn contraction_with_pair_operator() {
        let d = 3;
        let mut rng = seed::rng(2);
        let x = DMatrix::from_fn(27, 27, |_, _| StandardNormal.sample(&mut rng));
        let l = TruncatedLift::from_dense(d, &x).unwrap();
        let (l, _) = crate::truncation::truncate_both(&l).unwrap();
        assert!(l.pair_operator().is_some());
        let g = DVector::from_fn(9, |_, _| StandardNormal.sample(&mut rng));
        let m = gaussian_contract(&l, &g).unwrap();
        let flat = dense_flatten(&l.to_dense().unwrap(), d, crate::truncation::RectFlattening::B);
        let want = DMatrix::from_fn(9, 9, |p2, p3| (0..9).map(|p1| g[p1] * flat[(p1 * 9 + p3, p2)]).sum::<f64>());
        assert!((m - want).amax() < 1e-10);
    }

    #[test]
    fn orthonormal_instance_yields_components() {
        let a = orthonormal_components(4, 4, 3).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let l = TruncatedLift::from_dense(4, &dense_cube_projector(&a).unwrap()).unwrap();
        let out = rounding_round(&l, &t, 4, &ComponentSet::empty(4), &RoundingConfig::default(), 9).unwrap();
        assert_eq!(out.candidates.len(), 4);
        for c in &out.candidates {
            let b = c.as_dvector();
            let best = a.as_matrix().column_iter().map(|x| x.dot(&b)).fold(f64::MIN, f64::max);
            assert!(best > 1.0 - 1e-6, "{best}");
            assert!((c.score - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        let mut rng = seed::rng(0);
        let m = DMatrix::<f64>::zeros(4, 4);
        assert!(matches!(top_singular_vector(&m, 10, 1e-7, 1.0 + 1e-6, &mut rng), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn degenerate_top_singular_value_rejected() {
        let mut rng = seed::rng(0);
        let m = DMatrix::<f64>::identity(5, 5);
        assert!(matches!(top_singular_vector(&m, 100, 1e-7, 1.0 + 1e-6, &mut rng), Err(Error::NoSpectralGap { .. })));
    }

    #[test]
    fn top_singular_vector_on_diagonal() {
        let mut rng = seed::rng(3);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5]));
        let top = top_singular_vector(&m, 200, 1e-12, 1.0 + 1e-6, &mut rng).unwrap();
        assert!((top.sigma1 - 3.0).abs() < 1e-9);
        assert!((top.sigma2 - 1.0).abs() < 1e-6);
        assert!(top.vector[0].abs() > 1.0 - 1e-9);
    }

    #[test]
    fn extract_picks_sign_and_threshold() {
        let a = orthonormal_components(3, 3, 4).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let a0 = a.get(0).into_owned();
        let u = (&a0 * a0.transpose()).transpose();
        let flat = crate::tensor::matrix_to_vec(&u).unwrap();
        let c = extract_candidate(&(-flat.clone()), &t, 0.6).unwrap().unwrap();
        assert!((c.as_dvector() - &a0).norm() < 1e-10);
        assert!(extract_candidate(&flat, &t, 1.5).unwrap().is_none());
    }

    #[test]
    fn duplicate_test_uses_absolute_correlation() {
        let set = orthonormal_components(3, 1, 5).unwrap();
        let b = -set.get(0).into_owned();
        assert!(is_duplicate(&set, &b, 0.99));
        assert!(!is_duplicate(&ComponentSet::empty(3), &b, 0.99));
    }

    #[test]
    fn budget_formula() {
        let cfg = RoundingConfig::default();
        assert_eq!(cfg.trial_budget(16), 4 * 256 * 3);
        assert_eq!(RoundingConfig { max_trials: Some(7), ..cfg }.trial_budget(16), 7);
    }
}
