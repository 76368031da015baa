use serde::{Deserialize, Serialize};

use super::table::GradingTable;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermutationVariant {
    /// `u^i ⊗ v^j ↦ w(i,j) v^j ⊗ u^i`, a map `U⊗V → V⊗U`.
    P,
    /// Inverse of `P`, a map `V⊗U → U⊗V`.
    PInverse,
    /// Same as `P` with the dual weights `w^{-1}(i,j)`.
    PDual,
}

/// Anyonic permutation in the lexicographic product basis.
pub fn anyonic_permutation(gu: &GradingTable, gv: &GradingTable, variant: PermutationVariant) -> Result<Matrix> {
    let w = GradingTable::cross(gu, gv)?;
    let (du, dv) = (gu.dim(), gv.dim());
    let dim = du * dv;
    let mut p = Matrix::zeros(dim, dim);
    for i in 0..du {
        for j in 0..dv {
            let uv = i * dv + j;
            let vu = j * du + i;
            match variant {
                PermutationVariant::P => p[(vu, uv)] = w.w(i, j),
                PermutationVariant::PDual => p[(vu, uv)] = w.w_inv(i, j),
                PermutationVariant::PInverse => p[(uv, vu)] = w.w_inv(i, j),
            }
        }
    }
    Ok(p)
}

/// Graded tensor product of an ordered list of single-factor operators.
///
/// The coefficient of `e^{r_1}_{c_1} ⊗ … ⊗ e^{r_k}_{c_k}` picks up
/// `Π_{p<q} w(c_p, r_q) w^{-1}(c_p, c_q)` relative to the Kronecker product;
/// computed as a left fold.
pub fn graded_tensor(operands: &[(&Matrix, &GradingTable)]) -> Result<Matrix> {
    let multi: Vec<(&Matrix, Vec<&GradingTable>)> = operands.iter().map(|&(m, g)| (m, vec![g])).collect();
    let refs: Vec<(&Matrix, &[&GradingTable])> = multi.iter().map(|(m, f)| (*m, f.as_slice())).collect();
    graded_tensor_multi(&refs)
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for p in (0..dims.len()).rev() {
        out[p] = idx % dims[p];
        idx /= dims[p];
    }
    out
}

/// Graded tensor product where each operand may itself act on several
/// factors (listed left to right); phases internal to an operand are taken
/// as already contained in its matrix.
pub fn graded_tensor_multi(operands: &[(&Matrix, &[&GradingTable])]) -> Result<Matrix> {
    let mut acc = Matrix::identity(1, 1);
    let mut factors: Vec<&GradingTable> = Vec::new();
    for &(b, gb) in operands {
        let b_dims: Vec<usize> = gb.iter().map(|g| g.dim()).collect();
        let b_dim: usize = b_dims.iter().product();
        if b.nrows() != b.ncols() {
            return Err(Error::DimensionMismatch { expected: b.nrows(), found: b.ncols() });
        }
        if b.nrows() != b_dim {
            return Err(Error::DimensionMismatch { expected: b_dim, found: b.nrows() });
        }
        let mut crosses = Vec::with_capacity(factors.len());
        for g in &factors {
            let mut row = Vec::with_capacity(gb.len());
            for h in gb.iter() {
                row.push(GradingTable::cross(g, h)?);
            }
            crosses.push(row);
        }
        let dims: Vec<usize> = factors.iter().map(|g| g.dim()).collect();
        let acc_dim = acc.nrows();
        let d = b_dim;
        let b_digits: Vec<Vec<usize>> = (0..d).map(|k| digits(k, &b_dims)).collect();

        // phi[C * d + m] = Π_p Π_q w(C_p, m_q)
        let mut phi = vec![ONE; acc_dim * d];
        for col in 0..acc_dim {
            let cd = digits(col, &dims);
            for (m, md) in b_digits.iter().enumerate() {
                let mut z = ONE;
                for (p, &cp) in cd.iter().enumerate() {
                    for (q, &mq) in md.iter().enumerate() {
                        z *= crosses[p][q].w(cp, mq);
                    }
                }
                phi[col * d + m] = z;
            }
        }

        let mut out = Matrix::zeros(acc_dim * d, acc_dim * d);
        for col in 0..acc_dim {
            for row in 0..acc_dim {
                let a = acc[(row, col)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    for r in 0..d {
                        let x = b[(r, c)];
                        if x == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ph = if r == c { ONE } else { phi[col * d + r] / phi[col * d + c] };
                        out[(row * d + r, col * d + c)] = a * x * ph;
                    }
                }
            }
        }
        acc = out;
        factors.extend(gb.iter().copied());
    }
    Ok(acc)
}

/// Outcome of [`string_transparency_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransparencyReport {
    pub transparent: bool,
    /// Largest `|w(m,i)w(m,k) − w(m,j)w(m,l)|` over nonzero entries.
    pub worst: f64,
    /// 0-based `(i, k, j, l, m)` of the worst violation.
    pub witness: Option<[usize; 5]>,
}

/// Checks whether a two-factor operator on `U⊗U` conserves the grading
/// weight of every entry, so that chain embeddings of it carry no strings.
pub fn string_transparency_check(a: &Matrix, g: &GradingTable) -> TransparencyReport {
    string_transparency_check_tol(a, g, 1e-12)
}

pub fn string_transparency_check_tol(a: &Matrix, g: &GradingTable, tol: f64) -> TransparencyReport {
    let n = g.dim();
    let mut worst = 0.0_f64;
    let mut witness = None;
    if a.nrows() != n * n || a.ncols() != n * n {
        return TransparencyReport { transparent: false, worst: f64::INFINITY, witness: None };
    }
    for row in 0..n * n {
        for col in 0..n * n {
            if a[(row, col)].norm() == 0.0 {
                continue;
            }
            let (i, k) = (row / n, row % n);
            let (j, l) = (col / n, col % n);
            for m in 0..n {
                let v = (g.w(m, i) * g.w(m, k) - g.w(m, j) * g.w(m, l)).norm();
                if v > worst {
                    worst = v;
                    witness = Some([i, k, j, l, m]);
                }
            }
        }
    }
    TransparencyReport { transparent: worst <= tol, worst, witness }
}
