use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::GradingTable;
use crate::linalg::{unit, Matrix, C64};

/// Guard band for `a(u) = u + η` in the nested Lax operator.
pub const SINGULAR_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaxKind {
    Xxx { q: C64 },
    Tj { q1: C64, q2: C64, q3: C64 },
    /// Spin-level Lax operator of the nested problem, `aux(2) ⊗ quantum(3)`.
    Nested { q1: C64, q2: C64, q3: C64 },
}

/// Lax operator generator. Matrices are aux-major: entry
/// `[(a·d + c), (b·d + e)]` is `L^{ac}_{be}`, so the `(a,b)` auxiliary block
/// is the local quantum operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxSpec {
    pub kind: LaxKind,
    pub eta: C64,
    pub aux_grading: GradingTable,
    pub quantum_grading: GradingTable,
}

fn check_q(values: &[C64]) -> Result<()> {
    for &value in values {
        if (value.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnimodularQ { value });
        }
    }
    Ok(())
}

fn check_eta(eta: C64) -> Result<()> {
    if eta.norm() == 0.0 {
        Err(Error::ZeroEta)
    } else {
        Ok(())
    }
}

fn blocks(rows: Vec<Vec<Matrix>>) -> Matrix {
    let n = rows.len();
    let d = rows[0][0].nrows();
    let mut m = Matrix::zeros(n * d, n * d);
    for (a, row) in rows.iter().enumerate() {
        for (b, block) in row.iter().enumerate() {
            m.view_mut((a * d, b * d), (d, d)).copy_from(block);
        }
    }
    m
}

pub fn xxx_lax(eta: C64, q: C64) -> Result<LaxSpec> {
    check_eta(eta)?;
    check_q(&[q])?;
    let g = GradingTable::xxx(q)?;
    Ok(LaxSpec { kind: LaxKind::Xxx { q }, eta, aux_grading: g.clone(), quantum_grading: g })
}

pub fn tj_lax(eta: C64, q1: C64, q2: C64, q3: C64) -> Result<LaxSpec> {
    check_eta(eta)?;
    check_q(&[q1, q2, q3])?;
    let g = GradingTable::tj(q1, q2, q3)?;
    Ok(LaxSpec { kind: LaxKind::Tj { q1, q2, q3 }, eta, aux_grading: g.clone(), quantum_grading: g })
}

pub fn nested_lax(eta: C64, q1: C64, q2: C64, q3: C64) -> Result<LaxSpec> {
    check_eta(eta)?;
    check_q(&[q1, q2, q3])?;
    Ok(LaxSpec {
        kind: LaxKind::Nested { q1, q2, q3 },
        eta,
        aux_grading: GradingTable::new(2, &[(1, 1, q1), (2, 2, q2), (1, 2, q3)])?,
        quantum_grading: GradingTable::tj(q1, q2, q3)?,
    })
}

impl LaxSpec {
    pub fn aux_dim(&self) -> usize {
        self.aux_grading.dim()
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum_grading.dim()
    }

    pub fn evaluate(&self, u: C64) -> Result<Matrix> {
        let eta = self.eta;
        Ok(match self.kind {
            LaxKind::Xxx { q } => {
                let e = |i, j| unit(2, i, j);
                let id = Matrix::identity(2, 2);
                let n = e(1, 1);
                blocks(vec![
                    vec![&id * u + (&id - &n) * eta, e(1, 0) * eta],
                    vec![e(0, 1) * eta, &id * u + &n * (u * (q - 1.0) + q * eta)],
                ])
            }
            LaxKind::Tj { q1, q2, q3 } => {
                let e = |i, j| unit(3, i, j);
                let id = Matrix::identity(3, 3);
                let (nd, nu) = (e(0, 0), e(1, 1));
                let n = &nd + &nu;
                blocks(vec![
                    vec![
                        &nd * (q1 * (eta + u)) + (&nu * q3 + &id - &n) * u,
                        e(1, 0) * (q3 * eta),
                        e(2, 0) * eta,
                    ],
                    vec![
                        e(0, 1) * (q3 * eta),
                        (&nd * q3 + &id - &n) * u + &nu * (q2 * (u + eta)),
                        e(2, 1) * eta,
                    ],
                    vec![e(0, 2) * eta, e(1, 2) * eta, &id * u + (&id - &n) * eta],
                ])
            }
            LaxKind::Nested { q1, q2, q3 } => tj_nested_lax(u, eta, q1, q2, q3)?,
        })
    }
}

/// Nested Lax operator on `aux(2) ⊗ quantum(3)` with `a=u+η, b=u, c=η`.
pub fn tj_nested_lax(u: C64, eta: C64, q1: C64, q2: C64, q3: C64) -> Result<Matrix> {
    let a = u + eta;
    if a.norm() <= SINGULAR_GUARD {
        return Err(Error::SingularDenominator { value: a });
    }
    let (ba, ca) = (u / a, eta / a);
    let e = |i, j| unit(3, i, j);
    let (nd, nu) = (e(0, 0), e(1, 1));
    Ok(blocks(vec![
        vec![&nd * q1 + &nu * (ba * q3), e(1, 0) * (ca * q3)],
        vec![e(0, 1) * (ca * q3), &nu * q2 + &nd * (ba * q3)],
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{anyonic_permutation, PermutationVariant};
    use crate::linalg::{max_abs_diff, phase, ZERO};

    #[test]
    fn xxx_regular() {
        let eta = C64::new(0.9, 0.0);
        let lax = xxx_lax(eta, phase(1.2)).unwrap();
        let p = anyonic_permutation(&lax.aux_grading, &lax.quantum_grading, PermutationVariant::P).unwrap();
        assert!(max_abs_diff(&lax.evaluate(ZERO).unwrap(), &(p * eta)) < 1e-15);
    }

    #[test]
    fn tj_regular() {
        let eta = C64::new(1.3, 0.0);
        let lax = tj_lax(eta, phase(0.2), phase(-0.9), phase(2.1)).unwrap();
        let p = anyonic_permutation(&lax.aux_grading, &lax.quantum_grading, PermutationVariant::P).unwrap();
        assert!(max_abs_diff(&lax.evaluate(ZERO).unwrap(), &(p * eta)) < 1e-15);
    }

    #[test]
    fn xxx_entry_value() {
        let q = C64::new(0.0, 1.0);
        let m = xxx_lax(C64::new(1.0, 0.0), q).unwrap().evaluate(C64::new(1.0, 0.0)).unwrap();
        // aux block (2,2) on |1⟩
        assert!((m[(3, 3)] - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn tj_entry_value() {
        let q1 = C64::new(0.0, 1.0);
        let m = tj_lax(C64::new(1.0, 0.0), q1, phase(0.3), phase(0.5)).unwrap().evaluate(C64::new(1.0, 0.0)).unwrap();
        assert!((m[(0, 0)] - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn ungraded_tj_is_su3_permutation_form() {
        let one = C64::new(1.0, 0.0);
        let eta = C64::new(0.6, 0.0);
        let u = C64::new(0.25, -0.4);
        let m = tj_lax(eta, one, one, one).unwrap().evaluate(u).unwrap();
        let g = GradingTable::trivial(3);
        let p = anyonic_permutation(&g, &g, PermutationVariant::P).unwrap();
        assert!(max_abs_diff(&m, &(Matrix::identity(9, 9) * u + p * eta)) < 1e-15);
    }

    #[test]
    fn nested_at_zero_and_hole() {
        let (q1, q2, q3) = (phase(0.4), phase(1.4), phase(-0.8));
        let m = tj_nested_lax(ZERO, C64::new(1.0, 0.0), q1, q2, q3).unwrap();
        assert_eq!(m[(0, 0)], q1);
        assert_eq!(m[(1, 3)], q3);
        assert_eq!(m[(3, 1)], q3);
        assert_eq!(m[(4, 4)], q2);
        assert_eq!(m[(1, 1)], ZERO);
        let m = tj_nested_lax(C64::new(0.3, 0.2), C64::new(1.0, 0.0), q1, q2, q3).unwrap();
        for r in 0..6 {
            assert_eq!(m[(r, 2)], ZERO);
            assert_eq!(m[(r, 5)], ZERO);
        }
    }

    #[test]
    fn nested_guard_band() {
        let eta = C64::new(1.0, 0.0);
        let err = tj_nested_lax(-eta, eta, phase(0.1), phase(0.2), phase(0.3)).unwrap_err();
        assert!(matches!(err, Error::SingularDenominator { .. }));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(xxx_lax(C64::new(1.0, 0.0), C64::new(0.5, 0.0)), Err(Error::NonUnimodularQ { .. })));
        assert!(matches!(tj_lax(ZERO, phase(0.1), phase(0.2), phase(0.3)), Err(Error::ZeroEta)));
    }
}
