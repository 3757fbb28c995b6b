//! Random instances.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::ComponentSet;

/// `n` independent uniformly random unit vectors in `R^d`. Component `i`
/// depends only on `(seed, i)`, so a prefix of a larger sample is a smaller
/// sample.
pub fn sample_components(d: usize, n: usize, seed: u64) -> Result<ComponentSet> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("need d >= 1 and n >= 1, got d={d}, n={n}")));
    }
    let cols: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut rng = seed::stream(seed, "component", i as u64);
            loop {
                let v: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
                let norm = v.norm();
                if norm > 1e-12 {
                    break v / norm;
                }
            }
        })
        .collect();
    ComponentSet::from_vectors(&cols)
}

/// `n <= d` random orthonormal vectors.
pub fn orthonormal_components(d: usize, n: usize, seed: u64) -> Result<ComponentSet> {
    if n == 0 || n > d {
        return Err(Error::InvalidArgument(format!("orthonormal sample needs 1 <= n <= d, got n={n}, d={d}")));
    }
    let mut rng = seed::stream(seed, "orthonormal", 0);
    let g = DMatrix::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    ComponentSet::from_matrix(q.columns(0, n).into_owned())
}

/// A unit vector whose correlation with the unit vector `a` is exactly `rho`.
pub fn perturb_to_correlation(a: &DVector<f64>, rho: f64, seed: u64) -> DVector<f64> {
    let a = a.normalize();
    let mut rng = seed::stream(seed, "perturb", 0);
    let mut z = loop {
        let g = DVector::from_fn(a.len(), |_, _| StandardNormal.sample(&mut rng));
        let z = &g - &a * a.dot(&g);
        if z.norm() > 1e-12 {
            break z;
        }
    };
    z.normalize_mut();
    a * rho + z * (1.0 - rho * rho).max(0.0).sqrt()
}
