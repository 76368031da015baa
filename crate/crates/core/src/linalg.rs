//! Dense complex helpers shared by the algebraic and spectral modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Unimodular phase `e^{iθ}`.
pub fn phase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix unit `e^i_j` (0-based) of size `dim`.
pub fn unit(dim: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

/// Ordinary Kronecker product, left factor most significant.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    let scale = max_abs(m).max(1.0);
    max_abs_diff(m, &m.adjoint()) <= tol * scale
}

/// Sparse operator in coordinate form; used for the site factors of the
/// monodromy product, which have at most `n·d` entries per column.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize) -> Self {
        SparseOp { dim, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        if value != ZERO {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `self · rhs`.
    pub fn mul_dense(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(rhs.nrows(), self.dim);
        let cols = rhs.ncols();
        let mut out = Matrix::zeros(self.dim, cols);
        for &(r, c, v) in &self.entries {
            for k in 0..cols {
                out[(r, k)] += v * rhs[(c, k)];
            }
        }
        out
    }
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Matrix::zeros(m.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn general_eigenvalues(m: &Matrix) -> Result<Vec<C64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::ConvergenceFailure(format!("Schur iteration on {}×{}", m.nrows(), m.ncols())))?;
    let values = schur
        .eigenvalues()
        .ok_or_else(|| Error::ConvergenceFailure("Schur form not triangular".into()))?;
    let mut v: Vec<C64> = values.iter().copied().collect();
    sort_complex(&mut v);
    Ok(v)
}

/// Lexicographic order on (re, im); the canonical order of every eigenvalue list.
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest pointwise distance between two sorted spectra; infinite if the lengths differ.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}
