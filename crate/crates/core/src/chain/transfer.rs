use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::ModelSpec;
use crate::error::{Error, Result};
use crate::graded::{embed_aux_site, graded_partial_trace, ChainOperator};
use crate::integrability::{Param, ResidualReport};
use crate::linalg::{condition_number, frobenius, max_abs, Matrix, C64};

/// Condition number of `τ(0)` above which the logarithmic derivative is refused.
pub const SHIFT_CONDITION_LIMIT: f64 = 1e8;

/// Monodromy `T(λ) = E_L ⋯ E_1` on `aux ⊗ chain`, where `E_j` is the
/// graded embedding of the model Lax operator at site `j`.
pub fn build_monodromy(model: &ModelSpec, lambda: C64) -> Result<ChainOperator> {
    let layout = model.aux_layout();
    model.check_cap(layout.total_dim())?;
    let lax = model.lax().evaluate(lambda)?;
    let g = model.grading();
    let mut t = embed_aux_site(&lax, 1, layout, &g)?.to_dense();
    for j in 2..=model.num_sites {
        t = embed_aux_site(&lax, j, layout, &g)?.mul_dense(&t);
    }
    ChainOperator::new(layout, t)
}

/// `τ(λ) = Σ_a w(a,a)⁻¹ T(λ)^a_a`.
pub fn transfer_matrix(model: &ModelSpec, lambda: C64) -> Result<ChainOperator> {
    graded_partial_trace(&build_monodromy(model, lambda)?, &model.grading())
}

/// `‖[τ(λ), τ(μ)]‖_F / (‖τ(λ)‖_F ‖τ(μ)‖_F)`.
pub fn commutation_of_transfers(model: &ModelSpec, lambda: C64, mu: C64, tol: f64) -> Result<ResidualReport> {
    let a = transfer_matrix(model, lambda)?.matrix;
    let b = transfer_matrix(model, mu)?.matrix;
    let c = &a * &b - &b * &a;
    let rel = frobenius(&c) / (frobenius(&a) * frobenius(&b));
    Ok(ResidualReport::new(
        "transfer_commutation",
        vec![Param::new("lambda", lambda), Param::new("mu", mu)],
        rel,
        tol,
    ))
}

/// Coefficients `c_0, …, c_L` with `τ(λ) = Σ_k c_k λ^k`.
///
/// `τ` is a polynomial of degree ≤ L because every Lax entry is affine in λ,
/// so sampling on `L+1` points of the circle `|λ| = |η|` and applying the
/// discrete Fourier transform recovers it exactly up to rounding.
pub fn transfer_polynomial_coeffs(model: &ModelSpec) -> Result<Vec<Matrix>> {
    let k = model.num_sites + 1;
    let rho = model.eta.norm();
    let nodes: Vec<C64> = (0..k)
        .map(|j| C64::from_polar(rho, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let samples: Vec<Matrix> = nodes
        .par_iter()
        .map(|&x| transfer_matrix(model, x).map(|t| t.matrix))
        .collect::<Result<_>>()?;
    let dim = samples[0].nrows();
    let coeffs = (0..k)
        .map(|m| {
            let mut c = Matrix::zeros(dim, dim);
            for (j, s) in samples.iter().enumerate() {
                let w = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((j * m) % k) as f64 / k as f64);
                c += s * w;
            }
            c / (C64::new(k as f64, 0.0) * C64::new(rho.powi(m as i32), 0.0))
        })
        .collect();
    Ok(coeffs)
}

/// Evaluates a matrix polynomial by Horner's rule.
pub fn eval_polynomial(coeffs: &[Matrix], lambda: C64) -> Matrix {
    let mut acc = coeffs.last().cloned().expect("non-empty");
    for c in coeffs.iter().rev().skip(1) {
        acc = acc * lambda + c;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct HamiltonianExtraction {
    pub hamiltonian: ChainOperator,
    pub shift_condition: f64,
}

/// `H = τ'(0) τ(0)⁻¹` from the exact polynomial coefficients.
pub fn hamiltonian_from_transfer(model: &ModelSpec) -> Result<HamiltonianExtraction> {
    let coeffs = transfer_polynomial_coeffs(model)?;
    let tau0 = transfer_matrix(model, C64::new(0.0, 0.0))?.matrix;
    let cond = condition_number(&tau0);
    if cond.is_nan() || cond > SHIFT_CONDITION_LIMIT {
        return Err(Error::SingularShift { condition: cond });
    }
    let inv = tau0.try_inverse().ok_or(Error::SingularShift { condition: f64::INFINITY })?;
    let h = &coeffs[1] * inv;
    Ok(HamiltonianExtraction { hamiltonian: ChainOperator::new(model.layout(), h)?, shift_condition: cond })
}

/// Least-squares fit `target ≈ α·basis + β·I` in the Frobenius inner product.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AffineFit {
    pub alpha: C64,
    pub beta: C64,
    /// Max-entry residual of `target − α·basis − β·I`.
    pub residual: f64,
}

pub fn fit_affine(target: &Matrix, basis: &Matrix) -> AffineFit {
    let n = target.nrows();
    let id = Matrix::identity(n, n);
    let dot = |a: &Matrix, b: &Matrix| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>();
    let (g11, g12, g22) = (dot(basis, basis), dot(basis, &id), C64::new(n as f64, 0.0));
    let g21 = g12.conj();
    let (r1, r2) = (dot(basis, target), dot(&id, target));
    let det = g11 * g22 - g12 * g21;
    let (alpha, beta) = if det.norm() < 1e-300 {
        (C64::new(0.0, 0.0), r2 / g22)
    } else {
        ((r1 * g22 - g12 * r2) / det, (g11 * r2 - g21 * r1) / det)
    };
    let residual = max_abs(&(target - basis * alpha - id * beta));
    AffineFit { alpha, beta, residual }
}
