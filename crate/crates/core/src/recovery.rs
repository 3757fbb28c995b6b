//! The outer recovery loop: lift, truncate, round, boost, peel, repeat.

use std::time::Instant;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifting::{lift, top_k_eigenpairs, Deflated, EigConfig, EigStats, ImplicitRank};
use crate::netcontract::cube_matrix;
use crate::rounding::{is_duplicate, rounding_round, RoundingConfig, TrialStats};
use crate::seed;
use crate::tensor::{contract3, eval3, ComponentSet, Tensor3};
use crate::truncation::{truncate_both, TruncatedLift, TruncationSummary};

/// Result of tensor power iteration.
#[derive(Clone, Debug)]
pub struct PowerIterate {
    pub vector: DVector<f64>,
    /// `T(v, v, .)` vanished; the last non-degenerate iterate is returned.
    pub stalled: bool,
}

/// `v <- T(v, v, .) / ||T(v, v, .)||` for `iters` steps from the
/// normalised `v0`.
pub fn power_iterate(t: &Tensor3, v0: &DVector<f64>, iters: usize) -> Result<PowerIterate> {
    if v0.len() != t.dim() {
        return Err(Error::Shape(format!("start vector has length {}, tensor dimension is {}", v0.len(), t.dim())));
    }
    let n0 = v0.norm();
    if n0 == 0.0 || !n0.is_finite() {
        return Err(Error::InvalidArgument("start vector must be finite and nonzero".into()));
    }
    let mut v = v0 / n0;
    for _ in 0..iters {
        let w = contract3(t, &v, &v);
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(PowerIterate { vector: v, stalled: true });
        }
        if !wn.is_finite() {
            return Err(Error::NonFinite("power iteration"));
        }
        v = w / wn;
    }
    Ok(PowerIterate { vector: v, stalled: false })
}

/// Top-`new_rank` eigenpairs of `L - sum_{b in found} b^{x3} (b^{x3})^T`.
pub fn peel(l: &ImplicitRank, found: &ComponentSet, new_rank: usize, cfg: &EigConfig) -> Result<ImplicitRank> {
    let d = found.dim();
    if d.pow(3) != l.u.nrows() {
        return Err(Error::Shape(format!("components of dimension {d} against a lift on R^{}", l.u.nrows())));
    }
    let w = cube_matrix(found);
    let op = Deflated { base: l, remove: &w };
    top_k_eigenpairs(&op, new_rank, cfg)
}

/// How the loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryStatus {
    Complete,
    Stalled,
    RoundsExhausted,
}

/// Knobs for [`decompose`]. `None` picks the dimension-dependent default.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryConfig {
    pub seed: u64,
    /// Default `30 * ceil(log2 d)`.
    pub lift_iters: Option<usize>,
    pub lift_tol: f64,
    /// Default `ceil(3 * log2 d)`.
    pub boost_iters: Option<usize>,
    /// Default `ceil(10 * log2 n)`, at least 1.
    pub max_rounds: Option<usize>,
    pub rounding: RoundingConfig,
}

impl RecoveryConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, lift_iters: None, lift_tol: 1e-8, boost_iters: None, max_rounds: None, rounding: RoundingConfig::default() }
    }

    fn eig(&self, d: usize, label: &str, index: u64) -> EigConfig {
        let mut cfg = EigConfig::for_tensor_dim(d, seed::derive(self.seed, label, index));
        if let Some(it) = self.lift_iters {
            cfg.iters = it;
        }
        cfg.tol = self.lift_tol;
        cfg
    }

    pub fn boost_iters_for(&self, d: usize) -> usize {
        self.boost_iters.unwrap_or_else(|| (3.0 * (d.max(2) as f64).log2()).ceil() as usize)
    }

    pub fn max_rounds_for(&self, n: usize) -> usize {
        self.max_rounds.unwrap_or_else(|| ((10.0 * (n as f64).log2()).ceil() as usize).max(1))
    }
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Spectrum and convergence of the initial lift.
#[derive(Clone, Debug, Serialize)]
pub struct LiftSummary {
    pub rank: usize,
    pub eigvals: Vec<f64>,
    pub next_eigval: Option<f64>,
    pub stats: EigStats,
}

impl From<&ImplicitRank> for LiftSummary {
    fn from(l: &ImplicitRank) -> Self {
        Self { rank: l.rank(), eigvals: l.eigvals.iter().copied().collect(), next_eigval: l.next_eigval, stats: l.stats.clone() }
    }
}

/// Ledger entry for one outer round.
#[derive(Clone, Debug, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub remaining_before: usize,
    pub target: usize,
    pub truncation: TruncationSummary,
    pub trials: TrialStats,
    pub shortfall: bool,
    pub candidates: usize,
    pub admitted_after_boost: usize,
    pub boost_stalls: usize,
    pub mean_score_rounded: Option<f64>,
    pub mean_score_boosted: Option<f64>,
    pub peel: Option<LiftSummary>,
}

/// Wall-clock time per phase in milliseconds. Not part of the reproducible
/// output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PhaseTimings {
    pub lift_ms: f64,
    pub truncate_ms: f64,
    pub round_ms: f64,
    pub boost_ms: f64,
    pub peel_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub components: ComponentSet,
    pub status: RecoveryStatus,
    pub lift: LiftSummary,
    pub rounds: Vec<RoundRecord>,
    pub timings: PhaseTimings,
}

impl RecoveryResult {
    /// Total columns pushed through the lifted operator or its deflations.
    pub fn matvecs(&self) -> usize {
        self.lift.stats.matvecs + self.rounds.iter().filter_map(|r| r.peel.as_ref()).map(|p| p.stats.matvecs).sum::<usize>()
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Recovers up to `n` components of `t`.
///
/// Stops when all `n` are found, after two consecutive rounds that admit
/// nothing, or after the round cap. The returned status says which.
pub fn decompose(t: &Tensor3, n: usize, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let d = t.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if (n as f64) > (d as f64).powf(1.5) {
        return Err(Error::InvalidArgument(format!("rank {n} exceeds d^1.5 = {:.1} for d = {d}", (d as f64).powf(1.5))));
    }
    let total = Instant::now();
    let mut timings = PhaseTimings::default();

    let clock = Instant::now();
    let mut current = lift(t, n, &cfg.eig(d, "lift", 0))?;
    timings.lift_ms = ms(clock);
    let lift_summary = LiftSummary::from(&current);

    let boost_iters = cfg.boost_iters_for(d);
    let max_rounds = cfg.max_rounds_for(n);
    let mut found = ComponentSet::empty(d);
    let mut remaining = n;
    let mut rounds = Vec::new();
    let mut empty_streak = 0;
    let mut status = RecoveryStatus::RoundsExhausted;

    for round in 0..max_rounds {
        let clock = Instant::now();
        let (truncated, truncation) = truncate_both(&TruncatedLift::from(&current))?;
        timings.truncate_ms += ms(clock);

        let clock = Instant::now();
        let outcome = rounding_round(&truncated, t, remaining, &found, &cfg.rounding, seed::derive(cfg.seed, "round", round as u64))?;
        timings.round_ms += ms(clock);

        let clock = Instant::now();
        let mut fresh = ComponentSet::empty(d);
        let mut stalls = 0;
        let mut boosted_scores = Vec::new();
        for c in &outcome.candidates {
            let p = power_iterate(t, &c.as_dvector(), boost_iters)?;
            stalls += usize::from(p.stalled);
            if is_duplicate(&found, &p.vector, cfg.rounding.dup_threshold) || is_duplicate(&fresh, &p.vector, cfg.rounding.dup_threshold) {
                continue;
            }
            boosted_scores.push(eval3(t, &p.vector));
            fresh.push(&p.vector)?;
            found.push(&p.vector)?;
            if fresh.len() == remaining {
                break;
            }
        }
        timings.boost_ms += ms(clock);

        let admitted = fresh.len();
        remaining -= admitted;
        let rounded_scores: Vec<f64> = outcome.candidates.iter().map(|c| c.score).collect();
        let mut record = RoundRecord {
            round,
            remaining_before: remaining + admitted,
            target: outcome.target,
            truncation,
            trials: outcome.stats,
            shortfall: outcome.shortfall,
            candidates: outcome.candidates.len(),
            admitted_after_boost: admitted,
            boost_stalls: stalls,
            mean_score_rounded: mean(&rounded_scores),
            mean_score_boosted: mean(&boosted_scores),
            peel: None,
        };

        if remaining == 0 {
            rounds.push(record);
            status = RecoveryStatus::Complete;
            break;
        }
        if admitted == 0 {
            empty_streak += 1;
            rounds.push(record);
            if empty_streak >= 2 {
                status = RecoveryStatus::Stalled;
                break;
            }
            continue;
        }
        empty_streak = 0;

        let clock = Instant::now();
        current = peel(&current, &fresh, remaining, &cfg.eig(d, "peel", round as u64))?;
        timings.peel_ms += ms(clock);
        record.peel = Some(LiftSummary::from(&current));
        rounds.push(record);
    }

    timings.total_ms = ms(total);
    Ok(RecoveryResult { components: found, status, lift: lift_summary, rounds, timings })
}
