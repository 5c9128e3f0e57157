//! Dense linear algebra for the small matrices used by the depth functions:
//! a square matrix type, Cholesky factorisation and sample moments, backed by
//! `nalgebra`.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};

use super::tol;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Square matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("matrix entries must be finite".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, &data),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.inner.row(i).iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim(), other.dim(), "matmul dimension mismatch");
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim(), v.len(), "mul_vec dimension mismatch");
        (&self.inner * DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        (&self.inner - &other.inner).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.inner.determinant()
    }

    fn is_symmetric(&self) -> bool {
        let scale = self.inner.amax().max(1.0);
        (&self.inner - self.inner.transpose()).amax() <= tol::SYMMETRY * scale
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.inner[ij]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, ij: (usize, usize)) -> &mut f64 {
        &mut self.inner[ij]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.dim()).map(|i| self.row(i)))
            .finish()
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let y = self
            .lower
            .inner
            .solve_lower_triangular(&DVector::from_column_slice(b))
            .expect("Cholesky factor has a positive diagonal");
        y.iter().copied().collect()
    }

    /// Solves `Lᵀ x = y` by back substitution.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let x = self
            .lower
            .inner
            .tr_solve_lower_triangular(&DVector::from_column_slice(y))
            .expect("Cholesky factor has a positive diagonal");
        x.iter().copied().collect()
    }

    /// `vᵀ M⁻¹ v` computed as `‖L⁻¹ v‖²`.
    pub fn inv_quad_form(&self, v: &[f64]) -> f64 {
        self.solve_lower(v).iter().map(|y| y * y).sum()
    }

    /// `det M = (Π Lᵢᵢ)²`.
    pub fn determinant(&self) -> f64 {
        let d: f64 = self.lower.inner.diagonal().product();
        d * d
    }
}

/// Cholesky factorisation of a symmetric positive definite matrix.
///
/// Besides outright failure, a pivot `Lⱼⱼ²` at or below `CHOLESKY_PIVOT`
/// times its diagonal entry is rejected as numerically singular.
pub fn cholesky(m: &Matrix) -> Result<Cholesky> {
    if !m.is_symmetric() {
        return Err(Error::NotPositiveDefinite);
    }
    let lower = m
        .inner
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .unpack();
    for j in 0..m.dim() {
        let pivot = lower[(j, j)] * lower[(j, j)];
        if !(pivot > tol::CHOLESKY_PIVOT * m[(j, j)].abs()) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(Cholesky {
        lower: Matrix { inner: lower },
    })
}

/// `(x − μ) Σ⁻¹ (x − μ)ᵀ`.
pub fn quad_form_inv(x: &[f64], mu: &[f64], sigma: &Matrix) -> Result<f64> {
    check_dim(sigma.dim(), x.len())?;
    check_dim(sigma.dim(), mu.len())?;
    let chol = cholesky(sigma)?;
    let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    Ok(chol.inv_quad_form(&diff))
}

/// Sample mean and unbiased sample covariance.
///
/// Fails with `DegenerateSample` when the covariance is not positive
/// definite, which includes every sample with fewer than `p + 1` points.
pub fn sample_cov(data: &Dataset) -> Result<(Vec<f64>, Matrix)> {
    let (n, p) = (data.len(), data.dim());
    if n < p + 1 {
        return Err(Error::DegenerateSample);
    }
    let mut mean = vec![0.0; p];
    for row in data.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = Matrix::zeros(p);
    for row in data.rows() {
        for i in 0..p {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..p {
        for j in 0..=i {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    match cholesky(&cov) {
        Ok(_) => Ok((mean, cov)),
        Err(_) => Err(Error::DegenerateSample),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
