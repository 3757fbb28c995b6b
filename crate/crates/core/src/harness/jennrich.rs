//! Simultaneous diagonalisation, the classical method for `n <= d`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netcontract::cube_matrix;
use crate::seed;
use crate::tensor::{ComponentSet, Tensor3};

#[derive(Clone, Debug)]
pub struct JennrichResult {
    pub components: ComponentSet,
    /// Condition number of the projected slice that is inverted.
    pub condition_number: f64,
    /// Smallest gap between the recovered eigenvalues.
    pub min_eigen_gap: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JennrichReport {
    pub schema_version: u32,
    pub dim: usize,
    pub rank: usize,
    pub condition_number: f64,
    pub min_eigen_gap: f64,
    pub weights: Vec<f64>,
    pub components: Vec<Vec<f64>>,
}

impl JennrichResult {
    pub fn report(&self) -> JennrichReport {
        JennrichReport {
            schema_version: 1,
            dim: self.components.dim(),
            rank: self.components.len(),
            condition_number: self.condition_number,
            min_eigen_gap: self.min_eigen_gap,
            weights: self.weights.clone(),
            components: self.components.to_vectors().iter().map(|v| v.as_slice().to_vec()).collect(),
        }
    }
}

/// Recovers `n <= d` components from random slice pairs. Each component is
/// returned scaled by the cube root of its least-squares weight, so exact
/// unit components come back exactly with the right sign.
pub fn jennrich(t: &Tensor3, n: usize, seed_value: u64) -> Result<JennrichResult> {
    let d = t.dim();
    if n == 0 || n > d {
        return Err(Error::InvalidArgument(format!("simultaneous diagonalisation needs 1 <= n <= d, got n={n}, d={d}")));
    }
    let svd = t.unfold_1_23().svd(true, false);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let u = svd.u.as_ref().expect("requested");
    let p = DMatrix::from_fn(d, n, |r, c| u[(r, order[c])]);

    let mut rng = seed::stream(seed_value, "jennrich", 0);
    let g = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let h = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let gs = p.tr_mul(&(t.slice_along(&g) * &p));
    let hs = p.tr_mul(&(t.slice_along(&h) * &p));

    let hsv = hs.clone().singular_values();
    let (smax, smin) = (hsv.max(), hsv.min());
    if smin <= 1e-12 * smax.max(1e-300) {
        return Err(Error::Singular(format!("projected slice has condition {:e}", smax / smin.max(1e-300))));
    }
    let hinv = hs.try_inverse().ok_or_else(|| Error::Singular("projected slice".into()))?;
    let x = &gs * hinv;

    let eig = x.clone().complex_eigenvalues();
    let mut lambdas: Vec<f64> = eig.iter().map(|z| z.re).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let mut min_gap = f64::INFINITY;
    for w in lambdas.windows(2) {
        min_gap = min_gap.min((w[0] - w[1]).abs());
    }

    let mut vecs = Vec::with_capacity(n);
    for &lam in &lambdas {
        let shifted = &x - DMatrix::identity(n, n) * lam;
        let s = shifted.svd(false, true);
        let vt = s.v_t.expect("requested");
        let k = s.singular_values.imin();
        let xv = vt.row(k).transpose();
        vecs.push((&p * xv).normalize());
    }
    let basis = ComponentSet::from_vectors(&vecs)?;

    let design = cube_matrix(&basis);
    let target = DVector::from_column_slice(t.as_slice());
    let w = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let scaled: Vec<DVector<f64>> = vecs.iter().zip(w.iter()).map(|(v, &wi)| v * wi.cbrt()).collect();

    Ok(JennrichResult {
        components: ComponentSet::from_vectors(&scaled)?,
        condition_number: smax / smin,
        min_eigen_gap: if n > 1 { min_gap } else { f64::INFINITY },
        weights: w.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::matching::match_and_score;
    use crate::harness::sample::sample_components;
    use crate::tensor::build_symmetric_tensor;

    #[test]
    fn exact_on_generic_undercomplete() {
        let a = sample_components(8, 5, 2).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        let r = jennrich(&t, 5, 1).unwrap();
        let m = match_and_score(&a, &r.components, false);
        assert!(m.min_correlation() > 1.0 - 1e-8, "{:?}", m.correlations);
        assert!(r.condition_number.is_finite());
    }

    #[test]
    fn rejects_overcomplete() {
        let a = sample_components(3, 4, 2).unwrap();
        let t = build_symmetric_tensor(&a).unwrap();
        assert!(jennrich(&t, 4, 1).is_err());
    }
}
