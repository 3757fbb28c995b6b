//! Top-`k` eigenpairs of symmetric operators known only through block
//! products, and the rank-`n` lift of a tensor.
//!
//! The lifted operator is symmetric but not positive semidefinite, so
//! eigenpairs are ranked by magnitude: the best rank-`n` Frobenius
//! approximation keeps the `n` eigenvalues of largest `|lambda|`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netcontract::LiftedOperator;
use crate::seed;
use crate::tensor::Tensor3;

/// A symmetric linear map on `R^dim` applied to blocks of column vectors.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_block(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.ncols() {
            return Err(Error::Shape(format!("block has {} rows, matrix has {} columns", x.nrows(), self.ncols())));
        }
        Ok(self * x)
    }
}

/// `A - W W^T` for a base operator `A` and a tall matrix `W`.
pub struct Deflated<'a, A: SymmetricOperator> {
    pub base: &'a A,
    pub remove: &'a DMatrix<f64>,
}

impl<A: SymmetricOperator> SymmetricOperator for Deflated<'_, A> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut y = self.base.apply_block(x)?;
        if self.remove.ncols() > 0 {
            let c = self.remove.tr_mul(x);
            y.gemm(-1.0, self.remove, &c, 1.0);
        }
        Ok(y)
    }
}

/// Subspace iteration settings.
#[derive(Clone, Debug, Serialize)]
pub struct EigConfig {
    pub iters: usize,
    pub tol: f64,
    /// Extra working columns beyond `k`; with at least one the `(k+1)`-th
    /// Ritz value is reported.
    pub oversample: usize,
    pub seed: u64,
}

impl EigConfig {
    /// `30 * ceil(log2 d)` iterations at tolerance `1e-8` for tensor
    /// dimension `d`.
    pub fn for_tensor_dim(d: usize, seed: u64) -> Self {
        Self { iters: 30 * ceil_log2(d).max(1), tol: 1e-8, oversample: 1, seed }
    }
}

pub(crate) fn ceil_log2(x: usize) -> usize {
    (x.max(1) as f64).log2().ceil() as usize
}

/// Convergence record of a subspace iteration.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EigStats {
    pub iterations: usize,
    pub converged: bool,
    /// Largest `||A u_j - lambda_j u_j|| / |lambda_1|` over the kept pairs.
    pub worst_residual: f64,
    /// Columns pushed through the operator.
    pub matvecs: usize,
    /// Largest-magnitude Ritz value after each iteration.
    pub ritz_history: Vec<f64>,
}

/// A symmetric rank-`k` operator `U diag(lambda) U^T` with orthonormal `U`.
#[derive(Clone, Debug)]
pub struct ImplicitRank {
    pub u: DMatrix<f64>,
    pub eigvals: DVector<f64>,
    /// The Ritz value just past the kept block, when one was computed.
    pub next_eigval: Option<f64>,
    pub stats: EigStats,
}

impl ImplicitRank {
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// `V = U diag(lambda)`, so that the operator is `U V^T`.
    pub fn scaled(&self) -> DMatrix<f64> {
        let mut v = self.u.clone();
        for (j, mut c) in v.column_iter_mut().enumerate() {
            c *= self.eigvals[j];
        }
        v
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * self.scaled().transpose()
    }
}

impl SymmetricOperator for ImplicitRank {
    fn dim(&self) -> usize {
        self.u.nrows()
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut c = self.u.tr_mul(x);
        for (i, mut row) in c.row_iter_mut().enumerate() {
            row *= self.eigvals[i];
        }
        Ok(&self.u * c)
    }
}

fn gaussian_block(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seed::rng(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Rayleigh-Ritz on the basis `q` given `y = A q`. Returns Ritz values
/// ordered by decreasing magnitude and the matching coefficient vectors.
fn rayleigh_ritz(q: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = q.tr_mul(y);
    let h = (&h + h.transpose()) * 0.5;
    let p = h.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Rayleigh-Ritz projection".into()))?;
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
            .then(eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]))
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let s = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, s))
}

/// Top-`k` eigenpairs (by magnitude) of a symmetric operator by block
/// subspace iteration with QR re-orthonormalisation and a Rayleigh-Ritz
/// step every iteration.
///
/// Iteration stops once every kept residual is below `tol * |lambda_1|`.
/// Running out of iterations is reported in [`EigStats::converged`], not as
/// an error.
pub fn top_k_eigenpairs(op: &impl SymmetricOperator, k: usize, cfg: &EigConfig) -> Result<ImplicitRank> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::RankTooLarge { requested: k, dim: n });
    }
    let p = (k + cfg.oversample).min(n);
    let mut q = orthonormalize(gaussian_block(n, p, cfg.seed));
    let mut stats = EigStats { iterations: 0, converged: false, worst_residual: f64::INFINITY, matvecs: 0, ritz_history: Vec::new() };
    let iters = cfg.iters.max(1);

    let mut result = None;
    for it in 1..=iters {
        let y = op.apply_block(&q)?;
        stats.matvecs += p;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("operator application"));
        }
        let (vals, s) = rayleigh_ritz(&q, &y)?;
        let lead = vals[0].abs();
        if lead < 1e-14 {
            return Err(Error::SubspaceCollapse(lead));
        }
        let qs = &q * &s;
        let ys = &y * &s;
        let mut worst = 0.0f64;
        for (j, &v) in vals.iter().enumerate().take(k) {
            let r = ys.column(j) - qs.column(j) * v;
            worst = worst.max(r.norm() / lead);
        }
        stats.iterations = it;
        stats.worst_residual = worst;
        stats.ritz_history.push(vals[0]);
        let done = worst <= cfg.tol;
        if done || it == iters {
            stats.converged = done;
            result = Some((qs, vals));
            break;
        }
        q = orthonormalize(ys);
    }

    let (qs, vals) = result.expect("at least one iteration runs");
    Ok(ImplicitRank {
        u: qs.columns(0, k).into_owned(),
        eigvals: DVector::from_iterator(k, vals.iter().take(k).copied()),
        next_eigval: vals.get(k).copied(),
        stats,
    })
}

/// Rank-`n` approximation of the lifted operator of `t`.
pub fn lift(t: &Tensor3, n: usize, cfg: &EigConfig) -> Result<ImplicitRank> {
    let op = LiftedOperator::new(t);
    top_k_eigenpairs(&op, n, cfg)
}
