//! Dense complex matrices.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Dense double-precision complex matrix.
///
/// Thin wrapper over `nalgebra::DMatrix<Complex64>`; the inner matrix is
/// reachable through [`ComplexMatrix::as_inner`] for the simulator's hot loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        Self(DMatrix::from_row_slice(rows, cols, data))
    }

    /// i.i.d. circularly-symmetric complex Gaussian entries `CN(0, variance)`.
    pub fn random_cn<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> Self {
        Self(random_cn(rows, cols, variance, rng))
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn column(&self, col: usize) -> ComplexMatrix {
        let c = self.0.column(col);
        Self(DMatrix::from_fn(c.nrows(), 1, |i, _| c[i]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `selfᴴ · self`.
    pub fn gram(&self) -> Self {
        Self(self.0.ad_mul(&self.0))
    }

    /// General inverse through LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows() != self.cols() {
            return Err(Error::Domain(format!("cannot invert a {}x{} matrix", self.rows(), self.cols())));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| Error::SingularMatrix(format!("{}x{} LU inverse failed", self.rows(), self.cols())))
    }

    /// Inverse of a Hermitian positive-definite matrix through Cholesky.
    pub fn hermitian_inverse(&self) -> Result<Self> {
        hermitian_inverse(&self.0).map(Self)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// One `CN(0, variance)` draw.
#[inline]
pub(crate) fn cn<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

pub(crate) fn random_cn<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> DMatrix<Complex64> {
    let s = (0.5 * variance).sqrt();
    // Column-major fill order is part of the reproducibility contract.
    DMatrix::from_fn(rows, cols, |_, _| cn(rng, s))
}

pub(crate) fn hermitian_inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = m.nrows();
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SingularMatrix(format!("{n}x{n} matrix is not positive definite")))
}
