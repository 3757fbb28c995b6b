//! Dense symmetric third-order tensors, component sets and the index
//! conventions shared by every flattening in the crate.
//!
//! Entries are stored row-major: `T[i, j, k]` lives at `i*d*d + j*d + k`.
//! A vector of length `d^2` is folded into a `d x d` matrix with
//! `U[i, j] = u[i*d + j]`.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};

/// Symmetric order-3 tensor of dimension `d` stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    /// Wraps row-major entries. Symmetry is not checked here; see
    /// [`Tensor3::symmetry_defect`].
    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("tensor dimension must be positive".into()));
        }
        if data.len() != dim * dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tensor entries"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.data[(i * d + j) * d + k]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute difference between an entry and any of its index
    /// permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let x = self.get(i, j, k);
                    for y in [self.get(i, k, j), self.get(j, i, k), self.get(j, k, i), self.get(k, i, j), self.get(k, j, i)] {
                        worst = worst.max((x - y).abs());
                    }
                }
            }
        }
        worst
    }

    /// The `d^2 x d` unfolding with rows `(i, j)` and columns `k`.
    pub fn unfold_12_3(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d * d, d, |r, k| self.data[r * d + k])
    }

    /// The `d x d^2` mode-1 unfolding with rows `i` and columns `(j, k)`.
    pub fn unfold_1_23(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d * d, |i, c| self.data[i * d * d + c])
    }

    /// `T(x, ., .)` as a `d x d` matrix.
    pub fn slice_along(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    m[(j, k)] += xi * self.get(i, j, k);
                }
            }
        }
        m
    }
}

/// An ordered list of `n` vectors in `R^d`, stored as the columns of a
/// `d x n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSet {
    mat: DMatrix<f64>,
}

impl ComponentSet {
    pub fn from_matrix(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() == 0 {
            return Err(Error::Shape("components must have positive dimension".into()));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("component entries"));
        }
        Ok(Self { mat })
    }

    pub fn from_vectors(vectors: &[DVector<f64>]) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Shape("empty component list has no dimension".into()));
        };
        let d = first.len();
        if let Some(bad) = vectors.iter().position(|v| v.len() != d) {
            return Err(Error::Shape(format!(
                "component {bad} has length {} but component 0 has length {d}",
                vectors[bad].len()
            )));
        }
        Self::from_matrix(DMatrix::from_columns(vectors))
    }

    /// A set with dimension `dim` and no vectors.
    pub fn empty(dim: usize) -> Self {
        Self { mat: DMatrix::zeros(dim, 0) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn len(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.mat.ncols() == 0
    }

    pub fn get(&self, i: usize) -> DVectorView<'_, f64> {
        self.mat.column(i)
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn to_vectors(&self) -> Vec<DVector<f64>> {
        self.mat.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn push(&mut self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Shape(format!("vector of length {} pushed into dimension {}", v.len(), self.dim())));
        }
        let n = self.len();
        let mat = std::mem::replace(&mut self.mat, DMatrix::zeros(0, 0));
        self.mat = mat.insert_column(n, 0.0);
        self.mat.set_column(n, v);
        Ok(())
    }

    /// Gram matrix `<a_i, a_j>`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.mat.transpose() * &self.mat
    }
}

/// `T = sum_i a_i^{x3}`.
///
/// Each entry is accumulated from the sorted index triple so that all six
/// permutations receive bit-identical values.
pub fn build_symmetric_tensor(components: &ComponentSet) -> Result<Tensor3> {
    if components.is_empty() {
        return Err(Error::Shape("at least one component is required".into()));
    }
    let d = components.dim();
    let mut t = Tensor3::zeros(d);
    for i in 0..d {
        for j in i..d {
            for k in j..d {
                let mut s = 0.0;
                for a in components.as_matrix().column_iter() {
                    s += a[i] * a[j] * a[k];
                }
                for (p, q, r) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    t.data[(p * d + q) * d + r] = s;
                }
            }
        }
    }
    Ok(t)
}

/// `T(u, v, .)`, the vector with entries `sum_{i,j} T[i,j,k] u_i v_j`.
pub fn contract3(t: &Tensor3, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let d = t.dim;
    let mut out = DVector::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let w = u[i] * v[j];
            if w == 0.0 {
                continue;
            }
            let base = (i * d + j) * d;
            for k in 0..d {
                out[k] += w * t.data[base + k];
            }
        }
    }
    out
}

/// `T(b, b, b)`.
pub fn eval3(t: &Tensor3, b: &DVector<f64>) -> f64 {
    contract3(t, b, b).dot(b)
}

/// Grouping of tensor modes into matrix rows and columns.
///
/// Modes are numbered from 1. Within a group the first listed mode is the
/// most significant digit of the mixed-radix index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatteningSpec {
    pub row_modes: Vec<usize>,
    pub col_modes: Vec<usize>,
}

impl FlatteningSpec {
    pub fn new(row_modes: Vec<usize>, col_modes: Vec<usize>) -> Result<Self> {
        let order = row_modes.len() + col_modes.len();
        let mut seen = vec![false; order];
        for &m in row_modes.iter().chain(&col_modes) {
            if m == 0 || m > order || seen[m - 1] {
                return Err(Error::InvalidArgument(format!(
                    "modes {row_modes:?} / {col_modes:?} are not a partition of 1..={order}"
                )));
            }
            seen[m - 1] = true;
        }
        Ok(Self { row_modes, col_modes })
    }

    pub fn order(&self) -> usize {
        self.row_modes.len() + self.col_modes.len()
    }

    fn check_index(&self, dim: usize, idx: &[usize]) -> Result<()> {
        if idx.len() != self.order() {
            return Err(Error::Shape(format!("multi-index of length {} for order {}", idx.len(), self.order())));
        }
        if let Some(bad) = idx.iter().find(|&&i| i >= dim) {
            return Err(Error::Shape(format!("index {bad} out of range for dimension {dim}")));
        }
        Ok(())
    }

    /// Row and column of the multi-index `idx` (0-based entries, one per mode).
    pub fn flat_index(&self, dim: usize, idx: &[usize]) -> Result<(usize, usize)> {
        self.check_index(dim, idx)?;
        let fold = |modes: &[usize]| modes.iter().fold(0usize, |acc, &m| acc * dim + idx[m - 1]);
        Ok((fold(&self.row_modes), fold(&self.col_modes)))
    }

    /// Inverse of [`FlatteningSpec::flat_index`].
    pub fn unflat_index(&self, dim: usize, row: usize, col: usize) -> Result<Vec<usize>> {
        let rows = dim.pow(self.row_modes.len() as u32);
        let cols = dim.pow(self.col_modes.len() as u32);
        if row >= rows || col >= cols {
            return Err(Error::Shape(format!("({row}, {col}) outside a {rows} x {cols} flattening")));
        }
        let mut idx = vec![0; self.order()];
        for (modes, mut r) in [(&self.row_modes, row), (&self.col_modes, col)] {
            for &m in modes.iter().rev() {
                idx[m - 1] = r % dim;
                r /= dim;
            }
        }
        Ok(idx)
    }
}

/// Folds a length-`d^2` vector into `U[i, j] = u[i*d + j]`.
pub fn reshape_vec_to_matrix(u: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = (u.len() as f64).sqrt().round() as usize;
    if d * d != u.len() || d == 0 {
        return Err(Error::Shape(format!("length {} is not a positive perfect square", u.len())));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| u[i * d + j]))
}

/// Inverse of [`reshape_vec_to_matrix`].
pub fn matrix_to_vec(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::Shape(format!("{} x {} matrix is not square", d, m.ncols())));
    }
    Ok(DVector::from_fn(d * d, |r, _| m[(r / d, r % d)]))
}

/// `v^{x k}` as a flat row-major vector of length `d^k`.
pub fn kron_power(v: &DVector<f64>, k: usize) -> DVector<f64> {
    let mut out = DVector::from_element(1, 1.0);
    for _ in 0..k {
        out = out.kronecker(v);
    }
    out
}
