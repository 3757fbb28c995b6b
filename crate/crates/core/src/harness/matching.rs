//! Scoring an estimate against the ground truth.

use serde::Serialize;

use crate::tensor::ComponentSet;

/// Greedy one-to-one matching of estimated to true components.
#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub dim: usize,
    pub n_truth: usize,
    pub n_estimate: usize,
    /// Index of the estimate matched to each true component.
    pub assignment: Vec<Option<usize>>,
    /// `<a_i, b_pi(i)>` per true component, `0` when unmatched.
    pub correlations: Vec<f64>,
    /// `||a_i - b_pi(i)||` per true component, `||a_i||` when unmatched.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub unmatched_truth: usize,
    pub unmatched_estimates: usize,
    pub above_0_9: usize,
    pub above_0_99: usize,
    /// Count with correlation at least `1 - 1/d`.
    pub above_1_minus_inv_d: usize,
    pub sign_flipped: bool,
}

impl MatchReport {
    pub fn min_correlation(&self) -> f64 {
        self.correlations.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn count_at_least(&self, threshold: f64) -> usize {
        self.correlations.iter().filter(|&&c| c >= threshold).count()
    }
}

/// Matches pairs in order of decreasing `|<a_i, b_j>|`, using each side at
/// most once. Signs are respected unless `flip_signs` is set, in which case
/// every pair is scored as if `b_j` had the better sign.
pub fn match_and_score(truth: &ComponentSet, estimate: &ComponentSet, flip_signs: bool) -> MatchReport {
    let n = truth.len();
    let m = estimate.len();
    let mut pairs = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            pairs.push((truth.get(i).dot(&estimate.get(j)), i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut assignment = vec![None; n];
    let mut used = vec![false; m];
    for &(_, i, j) in &pairs {
        if assignment[i].is_none() && !used[j] {
            assignment[i] = Some(j);
            used[j] = true;
        }
    }

    let mut correlations = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    for (i, a) in assignment.iter().enumerate() {
        let ai = truth.get(i);
        match *a {
            Some(j) => {
                let bj = estimate.get(j);
                let c = ai.dot(&bj);
                let (c, e) = if flip_signs && c < 0.0 { (-c, (ai + bj).norm()) } else { (c, (ai - bj).norm()) };
                correlations.push(c);
                errors.push(e);
            }
            None => {
                correlations.push(0.0);
                errors.push(ai.norm());
            }
        }
    }

    let d = truth.dim();
    let count = |t: f64| correlations.iter().filter(|&&c| c >= t).count();
    MatchReport {
        dim: d,
        n_truth: n,
        n_estimate: m,
        max_error: errors.iter().copied().fold(0.0, f64::max),
        unmatched_truth: assignment.iter().filter(|a| a.is_none()).count(),
        unmatched_estimates: used.iter().filter(|u| !**u).count(),
        above_0_9: count(0.9),
        above_0_99: count(0.99),
        above_1_minus_inv_d: count(1.0 - 1.0 / d as f64),
        sign_flipped: flip_signs,
        assignment,
        correlations,
        errors,
    }
}
