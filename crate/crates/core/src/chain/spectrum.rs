use serde::{Deserialize, Serialize};

use super::operators::{tj_local, xxx_local};
use crate::error::{Error, Result};
use crate::graded::{ChainLayout, ChainOperator};
use crate::linalg::{general_eigenvalues, hermitian_eigen, hermitian_eigenvalues, is_hermitian, Matrix, C64};

/// Conserved-charge sector: particle number `n`, and for the t–J chain the
/// number `m` of down spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub n: usize,
    pub m: Option<usize>,
}

impl Sector {
    pub fn xxx(n: usize) -> Self {
        Sector { n, m: None }
    }

    pub fn tj(n: usize, m: usize) -> Self {
        Sector { n, m: Some(m) }
    }

    /// Basis indices of the sector, ascending. Local dimension 2 counts
    /// occupied sites; local dimension 3 counts non-hole sites and down spins.
    pub fn basis(&self, layout: &ChainLayout) -> Result<Vec<usize>> {
        let l = layout.num_sites();
        let d = layout.local_dim();
        let dim = layout.chain_dim();
        let count = |idx: usize, pred: &dyn Fn(usize) -> bool| (1..=l).filter(|&s| pred(layout.digit(idx, s))).count();
        match (d, self.m) {
            (2, None) => Ok((0..dim).filter(|&i| count(i, &|x| x == xxx_local::OCCUPIED) == self.n).collect()),
            (3, Some(m)) => Ok((0..dim)
                .filter(|&i| count(i, &|x| x != tj_local::HOLE) == self.n && count(i, &|x| x == tj_local::DOWN) == m)
                .collect()),
            _ => Err(Error::InvalidConfig(format!("sector {self} does not fit local dimension {d}"))),
        }
    }

    /// All sectors of a chain, in the order (n, m) ascending.
    pub fn all(layout: &ChainLayout) -> Vec<Sector> {
        let l = layout.num_sites();
        match layout.local_dim() {
            2 => (0..=l).map(Sector::xxx).collect(),
            _ => (0..=l).flat_map(|n| (0..=n).map(move |m| Sector::tj(n, m))).collect(),
        }
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.m {
            None => write!(f, "{}", self.n),
            Some(m) => write!(f, "{},{}", self.n, m),
        }
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| Error::InvalidConfig(format!("bad sector '{s}'")));
        match parts.as_slice() {
            [n] => Ok(Sector::xxx(num(n)?)),
            [n, m] => Ok(Sector::tj(num(n)?, num(m)?)),
            _ => Err(Error::InvalidConfig(format!("bad sector '{s}'"))),
        }
    }
}

pub fn restrict(m: &Matrix, basis: &[usize]) -> Matrix {
    Matrix::from_fn(basis.len(), basis.len(), |i, j| m[(basis[i], basis[j])])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by (re, im).
    pub eigenvalues: Vec<C64>,
    pub hermitian: bool,
    pub sector: Option<Sector>,
    pub dim: usize,
}

/// Full eigenvalue list of an operator, optionally restricted to a sector.
/// Hermitian inputs use the Hermitian solver.
pub fn exact_spectrum(a: &ChainOperator, sector: Option<Sector>) -> Result<Spectrum> {
    let m = match sector {
        Some(s) => restrict(&a.matrix, &s.basis(&a.layout)?),
        None => a.matrix.clone(),
    };
    let hermitian = is_hermitian(&m, 1e-12);
    let eigenvalues = if hermitian {
        hermitian_eigenvalues(&m).into_iter().map(|x| C64::new(x, 0.0)).collect()
    } else {
        general_eigenvalues(&m)?
    };
    if eigenvalues.len() != m.nrows() || eigenvalues.iter().any(|z| !z.is_finite()) {
        return Err(Error::ConvergenceFailure(format!("{} of {} eigenvalues finite", eigenvalues.len(), m.nrows())));
    }
    Ok(Spectrum { eigenvalues, hermitian, sector, dim: m.nrows() })
}

/// Degenerate eigenspace of a Hermitian operator with the restrictions of
/// commuting operators to it.
#[derive(Debug, Clone)]
pub struct Level {
    pub energy: f64,
    /// Orthonormal basis of the eigenspace (columns, in sector coordinates).
    pub vectors: Matrix,
    /// `V† A_k V` for each supplied commuting operator.
    pub blocks: Vec<Matrix>,
}

impl Level {
    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }

    /// Smallest singular value of the stacked `V†A_kV − Λ_k I`, relative to
    /// `max(1, |Λ_k|)`: zero iff some vector in the level is a joint
    /// eigenvector with eigenvalues `Λ_k`.
    pub fn joint_residual(&self, values: &[C64]) -> f64 {
        let m = self.multiplicity();
        if values.is_empty() || m == 0 {
            return 0.0;
        }
        let mut stack = Matrix::zeros(m * values.len(), m);
        for (k, (b, &v)) in self.blocks.iter().zip(values).enumerate() {
            let scale = v.norm().max(1.0);
            let shifted = (b - Matrix::identity(m, m) * v) / C64::new(scale, 0.0);
            stack.view_mut((k * m, 0), (m, m)).copy_from(&shifted);
        }
        stack.singular_values().min()
    }

    /// Eigenvalues of the restricted operator `k`.
    pub fn block_eigenvalues(&self, k: usize) -> Result<Vec<C64>> {
        general_eigenvalues(&self.blocks[k])
    }
}

/// Splits a Hermitian `h` (restricted to `sector`) into degenerate levels,
/// energies within `cluster_tol` grouped together.
pub fn resolve_levels(
    h: &ChainOperator,
    commuting: &[&ChainOperator],
    sector: Option<Sector>,
    cluster_tol: f64,
) -> Result<Vec<Level>> {
    let basis: Vec<usize> = match sector {
        Some(s) => s.basis(&h.layout)?,
        None => (0..h.dim()).collect(),
    };
    let hs = restrict(&h.matrix, &basis);
    if !is_hermitian(&hs, 1e-12) {
        return Err(Error::InvalidConfig("level resolution needs a Hermitian operator".into()));
    }
    let ops: Vec<Matrix> = commuting.iter().map(|a| restrict(&a.matrix, &basis)).collect();
    let (vals, vecs) = hermitian_eigen(&hs);
    let mut levels = Vec::new();
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end] - vals[end - 1] <= cluster_tol {
            end += 1;
        }
        let v = vecs.columns(start, end - start).into_owned();
        let blocks = ops.iter().map(|a| v.adjoint() * a * &v).collect();
        let energy = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        levels.push(Level { energy, vectors: v, blocks });
        start = end;
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_xxx_hamiltonian, transfer_matrix, ModelSpec};
    use crate::linalg::spectral_distance;

    #[test]
    fn identity_spectrum() {
        let layout = ChainLayout::new(3, 2, 0).unwrap();
        let s = exact_spectrum(&ChainOperator::identity(layout), None).unwrap();
        assert_eq!(s.eigenvalues.len(), 8);
        assert!(s.eigenvalues.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn sector_sizes() {
        let layout = ChainLayout::new(4, 3, 0).unwrap();
        let total: usize = Sector::all(&layout).iter().map(|s| s.basis(&layout).unwrap().len()).sum();
        assert_eq!(total, 81);
        assert_eq!(Sector::tj(2, 1).basis(&layout).unwrap().len(), 6 * 2);
        assert!(Sector::xxx(1).basis(&layout).is_err());
    }

    #[test]
    fn parse_sector() {
        assert_eq!("2".parse::<Sector>().unwrap(), Sector::xxx(2));
        assert_eq!(" 3, 1".parse::<Sector>().unwrap(), Sector::tj(3, 1));
        assert!("a".parse::<Sector>().is_err());
        assert_eq!(Sector::tj(3, 1).to_string(), "3,1");
    }

    #[test]
    fn conjugate_q_invariance() {
        let a = build_xxx_hamiltonian(&ModelSpec::xxx_angle(5, 1.0, 1.1).unwrap()).unwrap();
        let b = build_xxx_hamiltonian(&ModelSpec::xxx_angle(5, 1.0, -1.1).unwrap()).unwrap();
        let sa = exact_spectrum(&a, None).unwrap();
        let sb = exact_spectrum(&b, None).unwrap();
        assert!(spectral_distance(&sa.eigenvalues, &sb.eigenvalues) < 1e-12);
    }

    #[test]
    fn levels_carry_transfer_eigenvalues() {
        let m = ModelSpec::xxx_angle(4, 1.0, 0.7).unwrap();
        let h = build_xxx_hamiltonian(&m).unwrap();
        let lam = C64::new(0.3, 0.2);
        let tau = transfer_matrix(&m, lam).unwrap();
        let levels = resolve_levels(&h, &[&tau], Some(Sector::xxx(0)), 1e-9).unwrap();
        assert_eq!(levels.len(), 1);
        let vac = (lam + 1.0).powi(4) + m.grading().w_inv(1, 1) * lam.powi(4);
        assert!(levels[0].joint_residual(&[vac]) < 1e-12);
        assert!(levels[0].joint_residual(&[vac + 1e-3]) > 1e-6);
    }
}
