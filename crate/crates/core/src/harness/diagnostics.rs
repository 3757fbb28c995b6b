//! Advisory checks of the conditions under which recovery is expected to
//! work. Bounds are stated up to a polylogarithmic slack of `1 + ln d`;
//! verdicts inform, they do not gate anything.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::harness::isotropic::IsotropicTransform;
use crate::tensor::ComponentSet;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Condition {
    pub id: usize,
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticReport {
    pub dim: usize,
    pub n: usize,
    pub slack: f64,
    pub conditions: Vec<Condition>,
}

impl DiagnosticReport {
    pub fn all_ok(&self) -> bool {
        self.conditions.iter().all(|c| c.ok)
    }
}

fn lambda_max(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().max()
}

/// `R(a_i x a_i)` for every component, as columns.
pub fn isotropic_squares(a: &ComponentSet) -> Result<DMatrix<f64>> {
    let r = IsotropicTransform::new(a.dim())?;
    let mut out = DMatrix::zeros(a.dim().pow(2), a.len());
    for (i, col) in a.as_matrix().column_iter().enumerate() {
        out.set_column(i, &r.apply(&col.kronecker(&col))?);
    }
    Ok(out)
}

/// Evaluates all eight conditions.
pub fn diagnose(a: &ComponentSet) -> Result<DiagnosticReport> {
    let d = a.dim();
    let n = a.len();
    let (df, nf) = (d as f64, n as f64);
    let slack = 1.0 + df.ln();
    let g = a.gram();
    let b = isotropic_squares(a)?;
    let gb = b.tr_mul(&b);

    let cubes = (lambda_max(g.map(|x| x.powi(3))) - 1.0).abs();
    let squares = lambda_max(g.map(|x| x * x));
    let firsts = lambda_max(g.clone());

    // Sum b b^T and the projector onto span{b} share eigenvectors, so their
    // difference has eigenvalues lambda - 1 on the range.
    let ev = gb.clone().symmetric_eigenvalues();
    let top = ev.amax();
    let proj_dev = ev.iter().filter(|&&x| x > 1e-10 * top.max(1e-300)).map(|x| (x - 1.0).abs()).fold(0.0, f64::max);

    let mut cross = 0.0f64;
    for j in 0..n {
        let s: f64 = (0..n).filter(|&i| i != j).map(|i| gb[(i, j)].powi(2)).sum();
        cross = cross.max(s);
    }

    let mut iso_defect = 0.0f64;
    for (i, col) in a.as_matrix().column_iter().enumerate() {
        let aa = col.kronecker(&col);
        iso_defect = iso_defect.max((b.column(i) - aa).norm_squared());
    }

    let norm_dev = a.as_matrix().column_iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max);

    let mut coherence = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                coherence = coherence.max(g[(i, j)].powi(2));
            }
        }
    }

    let over = (nf / df).max(1.0);
    let rows = [
        ("cube_gram_deviation", cubes, nf / df.powf(1.5)),
        ("square_gram_norm", squares, over),
        ("component_gram_norm", firsts, over),
        ("isotropic_square_projector_deviation", proj_dev, nf / df.powf(1.5)),
        ("isotropic_square_cross_energy", cross, nf / (df * df)),
        ("isotropic_square_defect", iso_defect, 1.0 / df),
        ("norm_deviation", norm_dev, 1.0 / df.sqrt()),
        ("max_squared_coherence", coherence, 1.0 / df),
    ];
    let conditions = rows
        .iter()
        .enumerate()
        .map(|(k, &(name, value, base))| {
            let bound = base * slack;
            Condition { id: k + 1, name, value, bound, ok: value <= bound }
        })
        .collect();
    Ok(DiagnosticReport { dim: d, n, slack, conditions })
}
