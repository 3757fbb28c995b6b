//! The isotropic transform on `R^{d^2}`.
//!
//! `R = Pi_sym - c Phi Phi^T` with `Phi = vec(I_d)` and
//! `c = (1 - sqrt(2 / (d + 2))) / d`. On symmetric matrices it is the
//! identity on the traceless part and scales the trace direction by
//! `sqrt(2 / (d + 2))`, so `||R|| = 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropicTransform {
    pub dim: usize,
    pub c: f64,
}

impl IsotropicTransform {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let d = dim as f64;
        Ok(Self { dim, c: (1.0 - (2.0 / (d + 2.0)).sqrt()) / d })
    }

    /// `R x` for `x` in `R^{d^2}` read row-major as a `d x d` matrix.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.dim;
        if x.len() != d * d {
            return Err(Error::Shape(format!("expected length {}, got {}", d * d, x.len())));
        }
        let tr: f64 = (0..d).map(|i| x[i * d + i]).sum();
        Ok(DVector::from_fn(d * d, |r, _| {
            let (i, j) = (r / d, r % d);
            let s = 0.5 * (x[i * d + j] + x[j * d + i]);
            if i == j {
                s - self.c * tr
            } else {
                s
            }
        }))
    }

    /// `R` as a dense `d^2 x d^2` matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim * self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let e = DVector::from_fn(n, |r, _| if r == j { 1.0 } else { 0.0 });
            m.set_column(j, &self.apply(&e).expect("sized"));
        }
        m
    }

    /// `||R(v x v) - v x v||^2` in closed form: `(1/d)(1 - sqrt(2/(d+2)))^2 ||v||^4`.
    pub fn square_defect(&self, v_norm: f64) -> f64 {
        self.c * self.c * self.dim as f64 * v_norm.powi(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sample::sample_components;

    #[test]
    fn operator_norm_is_one() {
        for d in [2usize, 3, 5, 8] {
            let r = IsotropicTransform::new(d).unwrap();
            let s = r.dense().singular_values().max();
            assert!((s - 1.0).abs() < 1e-10, "d={d}: {s}");
        }
    }

    #[test]
    fn square_defect_closed_form() {
        for d in [2usize, 4, 9] {
            let r = IsotropicTransform::new(d).unwrap();
            let v = sample_components(d, 1, d as u64).unwrap().get(0) * 1.7;
            let vv = v.kronecker(&v);
            let got = (r.apply(&vv).unwrap() - &vv).norm_squared();
            assert!((got - r.square_defect(1.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_direction_scaled() {
        let d = 4;
        let r = IsotropicTransform::new(d).unwrap();
        let phi = DVector::from_fn(d * d, |k, _| if k / d == k % d { 1.0 } else { 0.0 });
        let out = r.apply(&phi).unwrap();
        assert!((out - &phi * (2.0 / (d as f64 + 2.0)).sqrt()).norm() < 1e-14);
    }
}
