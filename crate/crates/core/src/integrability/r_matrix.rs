use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::GradingTable;
use crate::linalg::{Matrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RMatrixKind {
    /// Rational six-vertex matrix on `C²⊗C²`.
    Xxx,
    /// Rational su(3) matrix on `C³⊗C³`.
    Su3,
}

/// Braid-form R-matrix `Ř(λ)` with its grading.
///
/// Both kinds share the rational form: `a(λ)=λ+η` on `(ii,ii)`, `c=η` on
/// `(ij,ij)` and `b(λ)=λ` on `(ij,ji)`, i.e. `Ř(λ) = η·I + λ·swap`.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrixSpec {
    pub kind: RMatrixKind,
    pub eta: C64,
    pub grading: GradingTable,
}

impl RMatrixSpec {
    pub fn local_dim(&self) -> usize {
        match self.kind {
            RMatrixKind::Xxx => 2,
            RMatrixKind::Su3 => 3,
        }
    }

    pub fn evaluate(&self, lambda: C64) -> Matrix {
        let d = self.local_dim();
        let mut r = Matrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    r[(i * d + i, i * d + i)] = lambda + self.eta;
                } else {
                    r[(i * d + j, i * d + j)] = self.eta;
                    r[(i * d + j, j * d + i)] = lambda;
                }
            }
        }
        r
    }

    /// `Ř(λ) − Ř(0)`, divided by `λ`.
    pub fn slope(&self) -> Matrix {
        let d = self.local_dim();
        let mut s = Matrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                s[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
            }
        }
        s
    }

    pub fn with_grading(mut self, grading: GradingTable) -> Result<Self> {
        if grading.dim() != self.local_dim() {
            return Err(Error::DimensionMismatch { expected: self.local_dim(), found: grading.dim() });
        }
        self.grading = grading;
        Ok(self)
    }
}

fn check_eta(eta: C64) -> Result<()> {
    if eta.norm() == 0.0 {
        Err(Error::ZeroEta)
    } else {
        Ok(())
    }
}

/// Six-vertex `Ř(λ)` with the trivial grading; attach a model grading with
/// [`RMatrixSpec::with_grading`].
pub fn xxx_r_matrix(eta: C64) -> Result<RMatrixSpec> {
    check_eta(eta)?;
    Ok(RMatrixSpec { kind: RMatrixKind::Xxx, eta, grading: GradingTable::trivial(2) })
}

pub fn tj_r_matrix(eta: C64) -> Result<RMatrixSpec> {
    check_eta(eta)?;
    Ok(RMatrixSpec { kind: RMatrixKind::Su3, eta, grading: GradingTable::trivial(3) })
}

/// Six-vertex `Ř(u)` graded by the spin block `w(1,1)=q1, w(2,2)=q2, w(1,2)=q3`;
/// the auxiliary partner of the nested Lax operator.
pub fn nested_r_matrix(eta: C64, q1: C64, q2: C64, q3: C64) -> Result<RMatrixSpec> {
    let g = GradingTable::new(2, &[(1, 1, q1), (2, 2, q2), (1, 2, q3)])?;
    xxx_r_matrix(eta)?.with_grading(g)
}
