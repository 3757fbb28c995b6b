//! Projection of a rank-`k` lift onto the spectral-norm unit ball in two
//! rectangular flattenings.
//!
//! Mode pairs are `P1 = (i1,i2)`, `P2 = (i3,i4)`, `P3 = (i5,i6)`. The lift
//! is stored as
//!
//! ```text
//! X[P1, P2, P3] = sum_{P2'} M0[P1, P2', P3] K[P2', P2],   M0 = U V^T
//! ```
//!
//! where `U, V` are `d^3 x k` factors (rows of `U` are `(i1,i2,i3)`, rows of
//! `V` are `(i4,i5,i6)`) and `K` is an optional `d^2 x d^2` operator on the
//! middle pair. Flattening A groups `{1,2,3,4}` against `{5,6}` and is
//! clipped by updating `V`; flattening B groups `{1,2,5,6}` against `{3,4}`
//! and is clipped by updating `K`. Both Gram matrices are `d^2 x d^2` and
//! are formed from `k d x k d` factor Grams without touching a `d^6` array.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifting::ImplicitRank;
use crate::netcontract::DENSE_LIMIT;
use crate::tensor::ComponentSet;

/// Eigenvalues of a flattening Gram at or below `1 + CLIP_SLACK` are left
/// alone.
pub const CLIP_SLACK: f64 = 1e-10;

/// The two rectangular flattenings used by the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RectFlattening {
    /// Rows `(i1,i2,i3,i4)`, columns `(i5,i6)`.
    A,
    /// Rows `(i1,i2,i5,i6)`, columns `(i3,i4)`.
    B,
}

impl RectFlattening {
    pub fn name(self) -> &'static str {
        match self {
            RectFlattening::A => "A",
            RectFlattening::B => "B",
        }
    }
}

/// What one clipping step did.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProjectionRecord {
    pub which: RectFlattening,
    pub norm_before: f64,
    pub clipped: usize,
}

/// Spectral norms measured after both projections.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TruncationSummary {
    pub norm_a: f64,
    pub norm_b: f64,
    /// True when the B step pushed the A norm above `1 + 1e-6`.
    pub a_bound_slipped: bool,
    pub records: Vec<ProjectionRecord>,
}

/// A lift in factored form, possibly after clipping.
#[derive(Clone, Debug)]
pub struct TruncatedLift {
    dim: usize,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    pair: Option<DMatrix<f64>>,
    pub records: Vec<ProjectionRecord>,
}

impl From<&ImplicitRank> for TruncatedLift {
    fn from(l: &ImplicitRank) -> Self {
        let d = (l.u.nrows() as f64).cbrt().round() as usize;
        Self { dim: d, u: l.u.clone(), v: l.scaled(), pair: None, records: Vec::new() }
    }
}

impl TruncatedLift {
    /// `X = U V^T` with `d^3 x k` factors.
    pub fn from_factors(d: usize, u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        let n = d.pow(3);
        if u.nrows() != n || v.nrows() != n || u.ncols() != v.ncols() {
            return Err(Error::Shape(format!(
                "factors {}x{} and {}x{} for dimension {d}",
                u.nrows(),
                u.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        Ok(Self { dim: d, u, v, pair: None, records: Vec::new() })
    }

    /// Exact factored form of a dense `d^3 x d^3` matrix (`U = X`, `V = I`).
    pub fn from_dense(d: usize, x: &DMatrix<f64>) -> Result<Self> {
        let n = d.pow(3);
        Self::from_factors(d, x.clone(), DMatrix::identity(n, n))
    }

    pub fn tensor_dim(&self) -> usize {
        self.dim
    }

    pub fn factor_rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn pair_operator(&self) -> Option<&DMatrix<f64>> {
        self.pair.as_ref()
    }

    /// `U~[P1, (c,i3)] = u_c[(P1,i3)]`, shape `d^2 x k d`.
    pub(crate) fn u_tilde(&self) -> DMatrix<f64> {
        let d = self.dim;
        let k = self.u.ncols();
        DMatrix::from_fn(d * d, k * d, |p1, ci| self.u[(p1 * d + ci % d, ci / d)])
    }

    /// `Z[(c,i4), P3] = v_c[(i4,P3)]`, shape `k d x d^2`.
    pub(crate) fn z_mat(&self) -> DMatrix<f64> {
        let d = self.dim;
        let d2 = d * d;
        let k = self.v.ncols();
        DMatrix::from_fn(k * d, d2, |ci, p3| self.v[((ci % d) * d2 + p3, ci / d)])
    }

    fn set_from_z(&mut self, z: &DMatrix<f64>) {
        let d = self.dim;
        let d2 = d * d;
        for c in 0..self.v.ncols() {
            for i4 in 0..d {
                for p3 in 0..d2 {
                    self.v[(i4 * d2 + p3, c)] = z[(c * d + i4, p3)];
                }
            }
        }
    }

    /// `<X, x (x) y (x) z>` for `x, y, z` in `R^{d^2}` on the pairs
    /// `P1, P2, P3`.
    pub fn contract_pairs(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        let d = self.dim;
        let ky = match &self.pair {
            Some(k) => k * y,
            None => y.clone(),
        };
        let a = self.u_tilde().tr_mul(x);
        let b = self.z_mat() * z;
        let mut s = 0.0;
        for c in 0..self.u.ncols() {
            for i3 in 0..d {
                let ai = a[c * d + i3];
                for i4 in 0..d {
                    s += ai * ky[i3 * d + i4] * b[c * d + i4];
                }
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        rect_gram(self, RectFlattening::A).trace().max(0.0).sqrt()
    }

    /// `||X - sum_i a_i^{x6}||_F`.
    pub fn distance_to_cubes(&self, a: &ComponentSet) -> f64 {
        let x2 = rect_gram(self, RectFlattening::A).trace();
        let mut cross = 0.0;
        for col in a.as_matrix().column_iter() {
            let aa = col.kronecker(&col);
            cross += self.contract_pairs(&aa, &aa, &aa);
        }
        let s2: f64 = a.gram().iter().map(|g| g.powi(6)).sum();
        (x2 - 2.0 * cross + s2).max(0.0).sqrt()
    }

    /// The `d^3 x d^3` matrix with rows `(i1,i2,i3)` and columns
    /// `(i4,i5,i6)`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        if d > DENSE_LIMIT {
            return Err(Error::OracleTooLarge { dim: d, limit: DENSE_LIMIT });
        }
        let m0 = &self.u * self.v.transpose();
        let Some(k) = &self.pair else {
            return Ok(m0);
        };
        let d2 = d * d;
        // r[(P1,P3), P2'] = M0[P1,P2',P3]
        let r = DMatrix::from_fn(d2 * d2, d2, |p13, p2| {
            let (p1, p3) = (p13 / d2, p13 % d2);
            m0[(p1 * d + p2 / d, (p2 % d) * d2 + p3)]
        });
        let rk = r * k;
        Ok(DMatrix::from_fn(d2 * d, d * d2, |row, col| {
            let (p1, i3) = (row / d, row % d);
            let (i4, p3) = (col / d2, col % d2);
            rk[(p1 * d2 + p3, i3 * d + i4)]
        }))
    }
}

/// `N^T N` for the chosen flattening `N` of the lift, a `d^2 x d^2` matrix.
pub fn rect_gram(l: &TruncatedLift, which: RectFlattening) -> DMatrix<f64> {
    let d = l.dim;
    let d2 = d * d;
    let k = l.u.ncols();
    let ut = l.u_tilde();
    let gu = ut.tr_mul(&ut);
    let z = l.z_mat();
    match which {
        RectFlattening::A => {
            let mut big = DMatrix::zeros(k * d, k * d);
            match &l.pair {
                None => {
                    for c in 0..k {
                        for c2 in 0..k {
                            let s: f64 = (0..d).map(|i3| gu[(c * d + i3, c2 * d + i3)]).sum();
                            for i4 in 0..d {
                                big[(c * d + i4, c2 * d + i4)] = s;
                            }
                        }
                    }
                }
                Some(kop) => {
                    let k2 = kop * kop.transpose();
                    for c in 0..k {
                        for c2 in 0..k {
                            for i3 in 0..d {
                                for j3 in 0..d {
                                    let g = gu[(c * d + i3, c2 * d + j3)];
                                    if g == 0.0 {
                                        continue;
                                    }
                                    for i4 in 0..d {
                                        for j4 in 0..d {
                                            big[(c * d + i4, c2 * d + j4)] += g * k2[(i3 * d + i4, j3 * d + j4)];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let w = z.transpose() * big * &z;
            (&w + w.transpose()) * 0.5
        }
        RectFlattening::B => {
            let gv = &z * z.transpose();
            let mut w0 = DMatrix::zeros(d2, d2);
            for c in 0..k {
                for c2 in 0..k {
                    for i3 in 0..d {
                        for j3 in 0..d {
                            let g = gu[(c * d + i3, c2 * d + j3)];
                            if g == 0.0 {
                                continue;
                            }
                            for i4 in 0..d {
                                for j4 in 0..d {
                                    w0[(i3 * d + i4, j3 * d + j4)] += g * gv[(c * d + i4, c2 * d + j4)];
                                }
                            }
                        }
                    }
                }
            }
            let w = match &l.pair {
                None => w0,
                Some(kop) => kop.transpose() * w0 * kop,
            };
            (&w + w.transpose()) * 0.5
        }
    }
}

fn sym_eigen(w: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(w.clone(), f64::EPSILON, 0)
        .or_else(|| SymmetricEigen::try_new(w, 1e-14, 100_000))
        .ok_or_else(|| Error::Eigen("flattening Gram".into()))
}

/// Spectral norm of one flattening.
pub fn flattening_norm(l: &TruncatedLift, which: RectFlattening) -> Result<f64> {
    let e = sym_eigen(rect_gram(l, which))?;
    Ok(e.eigenvalues.max().max(0.0).sqrt())
}

/// Clips every singular value of the chosen flattening to at most 1,
/// leaving the singular vectors unchanged.
pub fn clip_flattening(l: &TruncatedLift, which: RectFlattening) -> Result<TruncatedLift> {
    let w = rect_gram(l, which);
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("flattening Gram"));
    }
    let e = sym_eigen(w)?;
    let d2 = l.dim * l.dim;
    let mut h = DMatrix::zeros(d2, d2);
    let mut clipped = 0;
    for (j, &mu) in e.eigenvalues.iter().enumerate() {
        if mu > 1.0 + CLIP_SLACK {
            let p = e.eigenvectors.column(j);
            h.ger(1.0 - mu.sqrt().recip(), &p, &p, 1.0);
            clipped += 1;
        }
    }
    let norm_before = e.eigenvalues.max().max(0.0).sqrt();
    let mut out = l.clone();
    if clipped > 0 {
        let keep = DMatrix::identity(d2, d2) - h;
        match which {
            RectFlattening::A => {
                let z = l.z_mat() * keep;
                out.set_from_z(&z);
            }
            RectFlattening::B => {
                out.pair = Some(match &l.pair {
                    Some(k) => k * keep,
                    None => keep,
                });
            }
        }
    }
    out.records.push(ProjectionRecord { which, norm_before, clipped });
    Ok(out)
}

/// Clips flattening A, then B, and checks that the second step kept the
/// first bound. An A norm above `1 + 1e-3` afterwards means the index
/// conventions of the two steps disagree and is an error.
pub fn truncate_both(l: &TruncatedLift) -> Result<(TruncatedLift, TruncationSummary)> {
    let a = clip_flattening(l, RectFlattening::A)?;
    let b = clip_flattening(&a, RectFlattening::B)?;
    let norm_a = flattening_norm(&b, RectFlattening::A)?;
    let norm_b = flattening_norm(&b, RectFlattening::B)?;
    if !norm_a.is_finite() || !norm_b.is_finite() {
        return Err(Error::NonFinite("post-truncation norms"));
    }
    if norm_a > 1.0 + 1e-3 {
        return Err(Error::IndexConvention { which: "A", norm: norm_a });
    }
    if norm_b > 1.0 + 1e-3 {
        return Err(Error::IndexConvention { which: "B", norm: norm_b });
    }
    let summary = TruncationSummary { norm_a, norm_b, a_bound_slipped: norm_a > 1.0 + 1e-6, records: b.records.clone() };
    Ok((b, summary))
}

/// Dense flattening of a `d^3 x d^3` matrix (rows `(i1,i2,i3)`, columns
/// `(i4,i5,i6)`).
pub fn dense_flatten(x: &DMatrix<f64>, d: usize, which: RectFlattening) -> DMatrix<f64> {
    let d2 = d * d;
    match which {
        RectFlattening::A => DMatrix::from_fn(d2 * d2, d2, |r, p3| x[(r / d, (r % d) * d2 + p3)]),
        RectFlattening::B => DMatrix::from_fn(d2 * d2, d2, |r, p2| {
            let (p1, p3) = (r / d2, r % d2);
            x[(p1 * d + p2 / d, (p2 % d) * d2 + p3)]
        }),
    }
}

/// Inverse of [`dense_flatten`].
pub fn dense_unflatten(n: &DMatrix<f64>, d: usize, which: RectFlattening) -> DMatrix<f64> {
    let d2 = d * d;
    match which {
        RectFlattening::A => DMatrix::from_fn(d2 * d, d * d2, |row, col| n[(row * d + col / d2, col % d2)]),
        RectFlattening::B => DMatrix::from_fn(d2 * d, d * d2, |row, col| {
            let (p1, i3) = (row / d, row % d);
            let (i4, p3) = (col / d2, col % d2);
            n[(p1 * d2 + p3, i3 * d + i4)]
        }),
    }
}

/// Reference clip by full SVD.
pub fn svd_clip(n: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = n.clone().svd(true, true);
    let s = svd.singular_values.map(|x| x.min(1.0));
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    u * DMatrix::from_diagonal(&s) * vt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sample::sample_components;
    use crate::netcontract::dense_cube_projector;
    use crate::seed;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(r: usize, c: usize, s: u64) -> DMatrix<f64> {
        let mut rng = seed::rng(s);
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
    }

    fn spectral(m: &DMatrix<f64>) -> f64 {
        m.clone().singular_values().max()
    }

    #[test]
    fn gram_matches_dense_flattening() {
        let d = 3;
        let x = gaussian(27, 27, 1);
        let mut l = TruncatedLift::from_dense(d, &x).unwrap();
        for which in [RectFlattening::A, RectFlattening::B] {
            let n = dense_flatten(&x, d, which);
            assert!((rect_gram(&l, which) - n.tr_mul(&n)).amax() < 1e-10);
        }
        l.pair = Some(gaussian(9, 9, 2));
        let xk = l.to_dense().unwrap();
        for which in [RectFlattening::A, RectFlattening::B] {
            let n = dense_flatten(&xk, d, which);
            assert!((rect_gram(&l, which) - n.tr_mul(&n)).amax() < 1e-9);
        }
    }

    #[test]
    fn flatten_roundtrip() {
        let x = gaussian(27, 27, 3);
        for which in [RectFlattening::A, RectFlattening::B] {
            assert_eq!(dense_unflatten(&dense_flatten(&x, 3, which), 3, which), x);
        }
    }

    #[test]
    fn single_cube_gram_is_square_projector() {
        let a = sample_components(3, 1, 4).unwrap();
        let x = dense_cube_projector(&a).unwrap();
        let l = TruncatedLift::from_dense(3, &x).unwrap();
        let col = a.get(0).into_owned();
        let aa = col.kronecker(&col);
        let want = &aa * aa.transpose();
        assert!((rect_gram(&l, RectFlattening::A) - &want).amax() < 1e-12);
        assert!((rect_gram(&l, RectFlattening::B) - &want).amax() < 1e-12);
    }

    #[test]
    fn clip_matches_svd_reference() {
        let d = 3;
        let x = gaussian(27, 27, 5) * 0.5;
        let l = TruncatedLift::from_dense(d, &x).unwrap();
        let na = dense_flatten(&x, d, RectFlattening::A);
        let a = clip_flattening(&l, RectFlattening::A).unwrap();
        let want = dense_unflatten(&svd_clip(&na), d, RectFlattening::A);
        let got = a.to_dense().unwrap();
        assert!((&got - &want).norm() / want.norm() < 1e-8);

        let nb = dense_flatten(&got, d, RectFlattening::B);
        let b = clip_flattening(&a, RectFlattening::B).unwrap();
        let want = dense_unflatten(&svd_clip(&nb), d, RectFlattening::B);
        assert!((b.to_dense().unwrap() - &want).norm() / want.norm() < 1e-8);
    }

    #[test]
    fn norms_after_both_and_idempotence() {
        let d = 3;
        let x = gaussian(27, 27, 6);
        let l = TruncatedLift::from_dense(d, &x).unwrap();
        let (t, s) = truncate_both(&l).unwrap();
        assert!(s.norm_a <= 1.0 + 1e-6 && s.norm_b <= 1.0 + 1e-6);
        let dense = t.to_dense().unwrap();
        for which in [RectFlattening::A, RectFlattening::B] {
            assert!(spectral(&dense_flatten(&dense, d, which)) <= 1.0 + 1e-6);
        }
        let (t2, _) = truncate_both(&t).unwrap();
        assert!((t2.to_dense().unwrap() - &dense).norm() <= 1e-8 * dense.norm());
    }

    #[test]
    fn contraction_matches_dense() {
        let d = 3;
        let mut l = TruncatedLift::from_dense(d, &gaussian(27, 27, 7)).unwrap();
        l.pair = Some(gaussian(9, 9, 8));
        let dense = l.to_dense().unwrap();
        let (x, y, z) = (gaussian(9, 1, 9).column(0).into_owned(), gaussian(9, 1, 10).column(0).into_owned(), gaussian(9, 1, 11).column(0).into_owned());
        let flat = dense_flatten(&dense, d, RectFlattening::A);
        let want = (x.kronecker(&y)).dot(&(flat * &z));
        assert!((l.contract_pairs(&x, &y, &z) - want).abs() < 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn distance_to_cubes_matches_dense() {
        let a = sample_components(3, 4, 12).unwrap();
        let x = gaussian(27, 27, 13);
        let l = TruncatedLift::from_dense(3, &x).unwrap();
        let want = (&x - dense_cube_projector(&a).unwrap()).norm();
        assert!((l.distance_to_cubes(&a) - want).abs() < 1e-9 * want);
    }
}
