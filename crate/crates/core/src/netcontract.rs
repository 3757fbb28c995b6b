//! Matrix-free application of the lifted sixth-order operator.
//!
//! For a symmetric `T = sum_i a_i^{x3}` the lifted operator on `R^{d^3}` is
//!
//! ```text
//! M[(p,q,r),(s,t,u)] = sum_{a,b,c} T[a,b,c] T[a,p,s] T[b,q,t] T[c,r,u]
//!                    = sum_{j,k,l} (sum_i <a_i,a_j><a_i,a_k><a_i,a_l>) (a_j x a_k x a_l)(a_j x a_k x a_l)^T
//! ```
//!
//! i.e. `sum_a A_a (x) A_a (x) A_a` with `A_a = T(a_a, ., .)`. A block of
//! vectors is pushed through four stages, each a reshape followed by a
//! dense product:
//!
//! 1. contract the last mode of every column against `T_{3,12}`;
//! 2. (cached) `G = T_{12,3} T_{3,12}` regrouped as `[(a,q),(c,t)]`;
//! 3. multiply the regrouped stage-1 output by `G`;
//! 4. contract with `P[(a,s),p] = T[a,p,s]`.
//!
//! Cost is `O(d^6)` per column with `O(d^4)` scratch.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lifting::SymmetricOperator;
use crate::tensor::{kron_power, ComponentSet, Tensor3};

/// Largest `d` for which the dense oracles will materialise a `d^3 x d^3`
/// matrix.
pub const DENSE_LIMIT: usize = 12;

// Columns per chunk are chosen so that chunk * d^4 stays near this.
const CHUNK_BUDGET: usize = 1 << 23;

/// Staged, matrix-free form of the lifted operator.
#[derive(Clone, Debug)]
pub struct LiftedOperator {
    dim: usize,
    // [u, (c,r)] = T[c,r,u]
    t3_12: DMatrix<f64>,
    // [(a,q),(c,t)] = sum_b T[a,b,c] T[b,q,t]
    gram: DMatrix<f64>,
    // [(a,s),p] = T[a,p,s]
    proj: DMatrix<f64>,
}

impl LiftedOperator {
    pub fn new(t: &Tensor3) -> Self {
        let d = t.dim();
        let d2 = d * d;
        let t3_12 = DMatrix::from_fn(d, d2, |u, cr| t.get(cr / d, cr % d, u));
        // left[(a,c), b] = T[a,b,c], right[b, (q,t)] = T[b,q,t]
        let left = DMatrix::from_fn(d2, d, |ac, b| t.get(ac / d, b, ac % d));
        let right = DMatrix::from_fn(d, d2, |b, qt| t.get(b, qt / d, qt % d));
        let g0 = left * right;
        let gram = DMatrix::from_fn(d2, d2, |aq, ct| {
            let (a, q) = (aq / d, aq % d);
            let (c, tt) = (ct / d, ct % d);
            g0[(a * d + c, q * d + tt)]
        });
        let proj = DMatrix::from_fn(d2, d, |as_, p| t.get(as_ / d, p, as_ % d));
        Self { dim: d, t3_12, gram, proj }
    }

    /// Tensor dimension `d` (the operator acts on `R^{d^3}`).
    pub fn tensor_dim(&self) -> usize {
        self.dim
    }

    /// Columns per internal chunk.
    pub fn chunk_columns(&self) -> usize {
        (CHUNK_BUDGET / self.dim.pow(4)).max(1)
    }

    fn apply_chunk(&self, x: &DMatrix<f64>, c0: usize, cols: usize, out: &mut DMatrix<f64>) {
        let d = self.dim;
        let d2 = d * d;

        // stage 1: stacked[(col,s,t), u] = x_col[(s,t,u)]
        let mut stacked = DMatrix::zeros(cols * d2, d);
        for c in 0..cols {
            let col = x.column(c0 + c);
            for st in 0..d2 {
                for u in 0..d {
                    stacked[(c * d2 + st, u)] = col[st * d + u];
                }
            }
        }
        let a1 = stacked * &self.t3_12; // [(col,s,t),(c,r)]

        // regroup to b[(c,t),(col,s,r)]
        let mut b = DMatrix::zeros(d2, cols * d2);
        for col in 0..cols {
            for s in 0..d {
                for t in 0..d {
                    let row = col * d2 + s * d + t;
                    for c in 0..d {
                        for r in 0..d {
                            b[(c * d + t, col * d2 + s * d + r)] = a1[(row, c * d + r)];
                        }
                    }
                }
            }
        }

        // stage 3: z[(a,q),(col,s,r)]
        let z = &self.gram * b;

        // regroup to y[(a,s),(col,q,r)]
        let mut y = DMatrix::zeros(d2, cols * d2);
        for col in 0..cols {
            for s in 0..d {
                for r in 0..d {
                    let zc = col * d2 + s * d + r;
                    for a in 0..d {
                        for q in 0..d {
                            y[(a * d + s, col * d2 + q * d + r)] = z[(a * d + q, zc)];
                        }
                    }
                }
            }
        }

        // stage 4: o[p,(col,q,r)]
        let o = self.proj.tr_mul(&y);
        for col in 0..cols {
            let mut dst = out.column_mut(c0 + col);
            for p in 0..d {
                for qr in 0..d2 {
                    dst[p * d2 + qr] = o[(p, col * d2 + qr)];
                }
            }
        }
    }
}

impl SymmetricOperator for LiftedOperator {
    fn dim(&self) -> usize {
        self.dim.pow(3)
    }

    fn apply_block(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim.pow(3);
        if x.nrows() != n {
            return Err(Error::Shape(format!("block has {} rows, operator dimension is {n}", x.nrows())));
        }
        let mut out = DMatrix::zeros(n, x.ncols());
        let chunk = self.chunk_columns();
        let mut c0 = 0;
        while c0 < x.ncols() {
            let cols = chunk.min(x.ncols() - c0);
            self.apply_chunk(x, c0, cols, &mut out);
            c0 += cols;
        }
        Ok(out)
    }
}

/// `M X` for a block `X` of `d^3`-vectors.
pub fn lifted_matmat(op: &LiftedOperator, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    op.apply_block(x)
}

fn guard(d: usize) -> Result<()> {
    if d > DENSE_LIMIT {
        return Err(Error::OracleTooLarge { dim: d, limit: DENSE_LIMIT });
    }
    Ok(())
}

/// Materialises the operator by applying it to the identity.
pub fn dense_lifted_matrix(op: &LiftedOperator) -> Result<DMatrix<f64>> {
    guard(op.tensor_dim())?;
    let n = op.dim();
    op.apply_block(&DMatrix::identity(n, n))
}

/// The lifted operator assembled term by term from the components:
/// `sum_{j,k,l} (sum_i <a_i,a_j><a_i,a_k><a_i,a_l>) w_jkl w_jkl^T` with
/// `w_jkl = a_j x a_k x a_l`.
pub fn dense_quadsum_oracle(components: &ComponentSet) -> Result<DMatrix<f64>> {
    let d = components.dim();
    guard(d)?;
    let n = components.len();
    let g = components.gram();
    let vs = components.to_vectors();
    let mut m = DMatrix::zeros(d.pow(3), d.pow(3));
    for j in 0..n {
        for k in 0..n {
            let jk = vs[j].kronecker(&vs[k]);
            for l in 0..n {
                let coef: f64 = (0..n).map(|i| g[(i, j)] * g[(i, k)] * g[(i, l)]).sum();
                let w = jk.kronecker(&vs[l]);
                m.ger(coef, &w, &w, 1.0);
            }
        }
    }
    Ok(m)
}

/// `sum_i a_i^{x3} (a_i^{x3})^T`, the noiseless target of the lift.
pub fn dense_cube_projector(components: &ComponentSet) -> Result<DMatrix<f64>> {
    guard(components.dim())?;
    let w = cube_matrix(components);
    Ok(&w * w.transpose())
}

/// The `d^3 x n` matrix whose columns are `a_i^{x3}`.
pub fn cube_matrix(components: &ComponentSet) -> DMatrix<f64> {
    let vs = components.to_vectors();
    let cols: Vec<_> = vs.iter().map(|a| kron_power(a, 3)).collect();
    if cols.is_empty() {
        return DMatrix::zeros(components.dim().pow(3), 0);
    }
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sample::sample_components;
    use crate::tensor::build_symmetric_tensor;
    use nalgebra::DVector;

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn single_basis_vector_gives_rank_one_projector() {
        let a = ComponentSet::from_matrix(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let m = dense_lifted_matrix(&LiftedOperator::new(&t)).unwrap();
        let mut want = DMatrix::zeros(8, 8);
        want[(0, 0)] = 1.0;
        assert_eq!(m, want);
    }

    #[test]
    fn orthonormal_lift_is_cube_projector() {
        let a = ComponentSet::from_matrix(DMatrix::identity(3, 3)).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let m = dense_lifted_matrix(&LiftedOperator::new(&t)).unwrap();
        let p = dense_cube_projector(&a).unwrap();
        assert!(rel(&m, &p) < 1e-14);
        let x = DVector::from_fn(27, |i, _| (i as f64 * 0.37).sin());
        assert!((&m * &x - &p * &x).norm() < 1e-13);
    }

    #[test]
    fn staged_matches_quadsum_small() {
        for (d, n, seed) in [(3, 2, 1u64), (4, 5, 2), (5, 6, 3)] {
            let a = sample_components(d, n, seed).unwrap();
            let t = build_symmetric_tensor(&a).unwrap();
            let m = dense_lifted_matrix(&LiftedOperator::new(&t)).unwrap();
            let o = dense_quadsum_oracle(&a).unwrap();
            assert!(rel(&m, &o) < 1e-10, "d={d} n={n}: {}", rel(&m, &o));
        }
    }

    #[test]
    fn chunking_is_transparent() {
        let a = sample_components(4, 3, 9).unwrap();
        let op = LiftedOperator::new(&build_symmetric_tensor(&a).unwrap());
        let x = DMatrix::from_fn(64, 7, |i, j| ((i * 7 + j) as f64).cos());
        let full = op.apply_block(&x).unwrap();
        for j in 0..7 {
            let one = op.apply_block(&x.columns(j, 1).into_owned()).unwrap();
            assert!((one.column(0) - full.column(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_guard() {
        let a = sample_components(13, 2, 1).unwrap();
        assert!(matches!(dense_quadsum_oracle(&a), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn wrong_block_height() {
        let a = sample_components(3, 2, 1).unwrap();
        let op = LiftedOperator::new(&build_symmetric_tensor(&a).unwrap());
        assert!(op.apply_block(&DMatrix::zeros(26, 1)).is_err());
    }
}
