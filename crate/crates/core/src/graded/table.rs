use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};

const UNIMODULAR_TOL: f64 = 1e-12;

/// Symmetric unimodular phase table `w(i,j)` of an anyonically graded space.
///
/// Indices are 0-based in the accessors and 1-based in [`GradingTable::new`]
/// and the JSON form, which mirrors the usual `e^i_j` labelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GradingRecord", into = "GradingRecord")]
pub struct GradingTable {
    dim: usize,
    w: Vec<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradingRecord {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl GradingTable {
    /// Builds a table from 1-based `(i, j, phase)` entries; missing entries are 1
    /// and each entry is mirrored to `(j, i)`.
    pub fn new(dim: usize, entries: &[(usize, usize, C64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let mut w = vec![ONE; dim * dim];
        let mut set = vec![false; dim * dim];
        for &(i, j, value) in entries {
            for idx in [i, j] {
                if idx == 0 || idx > dim {
                    return Err(Error::IndexOutOfRange { index: idx, dim });
                }
            }
            let modulus = value.norm();
            if (modulus - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NonUnimodularEntry { i, j, modulus });
            }
            let (a, b) = (i - 1, j - 1);
            for (r, c) in [(a, b), (b, a)] {
                let k = r * dim + c;
                if set[k] && (w[k] - value).norm() > UNIMODULAR_TOL {
                    return Err(Error::SymmetryConflict { i, j });
                }
                w[k] = value;
                set[k] = true;
            }
        }
        Ok(GradingTable { dim, w })
    }

    pub fn trivial(dim: usize) -> Self {
        GradingTable { dim, w: vec![ONE; dim * dim] }
    }

    /// Two-state table with `w(2,2) = q`.
    pub fn xxx(q: C64) -> Result<Self> {
        Self::new(2, &[(2, 2, q)])
    }

    /// Three-state table (↓, ↑, hole) with `w(1,1)=q1, w(2,2)=q2, w(1,2)=q3`.
    pub fn tj(q1: C64, q2: C64, q3: C64) -> Result<Self> {
        Self::new(3, &[(1, 1, q1), (2, 2, q2), (1, 2, q3)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn w(&self, i: usize, j: usize) -> C64 {
        self.w[i * self.dim + j]
    }

    #[inline]
    pub fn w_inv(&self, i: usize, j: usize) -> C64 {
        ONE / self.w(i, j)
    }

    /// `w(m,c)/w(m,e)`, exactly 1 when `c == e`.
    #[inline]
    pub fn ratio(&self, m: usize, c: usize, e: usize) -> C64 {
        if c == e {
            ONE
        } else {
            self.w(m, c) / self.w(m, e)
        }
    }

    /// Table with every entry inverted.
    pub fn dual(&self) -> Self {
        GradingTable { dim: self.dim, w: self.w.iter().map(|z| ONE / z).collect() }
    }

    pub fn is_trivial(&self) -> bool {
        self.w.iter().all(|&z| z == ONE)
    }

    /// True if `self` equals the leading `self.dim × self.dim` block of `other`.
    pub fn is_leading_block_of(&self, other: &GradingTable) -> bool {
        if self.dim > other.dim {
            return false;
        }
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.w(i, j) - other.w(i, j)).norm() <= UNIMODULAR_TOL))
    }

    /// Table used for the cross phases between two graded spaces: the larger
    /// of the two, provided the smaller is its leading block.
    pub fn cross<'a>(a: &'a GradingTable, b: &'a GradingTable) -> Result<&'a GradingTable> {
        let (small, large) = if a.dim <= b.dim { (a, b) } else { (b, a) };
        if small.is_leading_block_of(large) {
            Ok(large)
        } else {
            Err(Error::GradingMismatch(format!(
                "{}-dimensional table is not a leading block of the {}-dimensional one",
                small.dim, large.dim
            )))
        }
    }
}

impl From<GradingTable> for GradingRecord {
    fn from(t: GradingTable) -> Self {
        let mut entries = Vec::new();
        for i in 0..t.dim {
            for j in i..t.dim {
                let z = t.w(i, j);
                entries.push((i + 1, j + 1, z.re, z.im));
            }
        }
        GradingRecord { dim: t.dim, entries }
    }
}

impl TryFrom<GradingRecord> for GradingTable {
    type Error = Error;

    fn try_from(r: GradingRecord) -> Result<Self> {
        let entries: Vec<_> = r.entries.iter().map(|&(i, j, re, im)| (i, j, C64::new(re, im))).collect();
        GradingTable::new(r.dim, &entries)
    }
}
