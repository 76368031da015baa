use serde::{Deserialize, Serialize};

use super::table::GradingTable;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SparseOp, C64, ZERO};

/// Factor layout of a chain Hilbert space: auxiliary factor leftmost (if any),
/// then sites `L, L−1, …, 1`. Basis states are ordered lexicographically, so
/// site `j` is the digit of weight `d^{j−1}` and the auxiliary digit has
/// weight `d^L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLayout {
    num_sites: usize,
    local_dim: usize,
    aux_dim: usize,
}

impl ChainLayout {
    pub fn new(num_sites: usize, local_dim: usize, aux_dim: usize) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::InvalidConfig("L must be ≥ 1".into()));
        }
        if local_dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(ChainLayout { num_sites, local_dim, aux_dim })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn has_aux(&self) -> bool {
        self.aux_dim > 0
    }

    /// Dimension without the auxiliary factor, `d^L`.
    pub fn chain_dim(&self) -> usize {
        self.local_dim.pow(self.num_sites as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.aux_dim.max(1) * self.chain_dim()
    }

    /// Same sites, auxiliary factor removed.
    pub fn without_aux(&self) -> Self {
        ChainLayout { aux_dim: 0, ..*self }
    }

    pub fn with_aux(&self, aux_dim: usize) -> Self {
        ChainLayout { aux_dim, ..*self }
    }

    /// Weight of site `j` (1-based) in a chain index.
    #[inline]
    pub fn stride(&self, site: usize) -> usize {
        self.local_dim.pow(site as u32 - 1)
    }

    /// Local state of site `j` in chain index `idx`.
    #[inline]
    pub fn digit(&self, idx: usize, site: usize) -> usize {
        (idx / self.stride(site)) % self.local_dim
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.num_sites {
            Err(Error::SiteOutOfRange { site, num_sites: self.num_sites })
        } else {
            Ok(())
        }
    }

    /// Product of `f(m)` over the local states `m` of sites `> site`.
    fn string<F: Fn(usize) -> C64>(&self, idx: usize, site: usize, f: F) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for k in site + 1..=self.num_sites {
            acc *= f(self.digit(idx, k));
        }
        acc
    }
}

/// Dense operator on the space described by its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    pub layout: ChainLayout,
    pub matrix: Matrix,
}

impl ChainOperator {
    pub fn new(layout: ChainLayout, matrix: Matrix) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(ChainOperator { layout, matrix })
    }

    pub fn identity(layout: ChainLayout) -> Self {
        let dim = layout.total_dim();
        ChainOperator { layout, matrix: Matrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Auxiliary block `T^a_b` (0-based) acting on the chain.
    pub fn aux_block(&self, a: usize, b: usize) -> Result<Matrix> {
        if !self.layout.has_aux() {
            return Err(Error::NoAuxiliaryFactor);
        }
        let n = self.layout.aux_dim();
        if a >= n || b >= n {
            return Err(Error::IndexOutOfRange { index: a.max(b), dim: n });
        }
        let d = self.layout.chain_dim();
        Ok(self.matrix.view((a * d, b * d), (d, d)).into_owned())
    }
}

/// Graded embedding of a single-site operator.
///
/// Equivalent to [`super::graded_tensor`] over the factor order with
/// identities everywhere except site `site`; every factor standing left of
/// the site (sites with larger index, and the auxiliary operand if given)
/// contributes `w(c_p, r)/w(c_p, c)` for each entry `X[r, c]`.
pub fn embed_local(
    x: &Matrix,
    site: usize,
    layout: ChainLayout,
    g: &GradingTable,
    aux_operand: Option<(&Matrix, &GradingTable)>,
) -> Result<ChainOperator> {
    layout.check_site(site)?;
    let d = layout.local_dim();
    if x.nrows() != d || x.ncols() != d || g.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
    }
    let chain = layout.chain_dim();
    let stride = layout.stride(site);
    let entries: Vec<(usize, usize, C64)> = (0..d)
        .flat_map(|r| (0..d).map(move |c| (r, c)))
        .filter(|&(r, c)| x[(r, c)] != ZERO)
        .map(|(r, c)| (r, c, x[(r, c)]))
        .collect();

    let mut site_op = Matrix::zeros(chain, chain);
    for col in 0..chain {
        let c0 = layout.digit(col, site);
        for &(r, c, v) in &entries {
            if c != c0 {
                continue;
            }
            let row = col - c * stride + r * stride;
            let ph = layout.string(col, site, |m| g.ratio(m, r, c));
            site_op[(row, col)] = v * ph;
        }
    }

    match aux_operand {
        None => ChainOperator::new(layout.without_aux(), site_op),
        Some((a, ga)) => {
            let n = ga.dim();
            if a.nrows() != n || a.ncols() != n || (layout.has_aux() && layout.aux_dim() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
            }
            let w = GradingTable::cross(ga, g)?;
            let out_layout = layout.with_aux(n);
            let mut m = Matrix::zeros(n * chain, n * chain);
            for ab in 0..n {
                for aa in 0..n {
                    let av = a[(aa, ab)];
                    if av == ZERO {
                        continue;
                    }
                    for col in 0..chain {
                        let c = layout.digit(col, site);
                        for row_r in 0..d {
                            let row = col - c * stride + row_r * stride;
                            let s = site_op[(row, col)];
                            if s == ZERO {
                                continue;
                            }
                            m[(aa * chain + row, ab * chain + col)] = av * s * w.ratio(ab, row_r, c);
                        }
                    }
                }
            }
            ChainOperator::new(out_layout, m)
        }
    }
}

/// Embeds an ordinary matrix on `aux ⊗ site` (aux-major, `n·d` square) into
/// the auxiliary-augmented chain, inserting the intermediate sites by the
/// graded rule: each entry `op[(a,c),(b,e)]` is dressed with the string
/// `Π_{k>site} w(s_k, c)/w(s_k, e)`. This is the site factor of the monodromy.
pub fn embed_aux_site(op: &Matrix, site: usize, layout: ChainLayout, g: &GradingTable) -> Result<SparseOp> {
    layout.check_site(site)?;
    if !layout.has_aux() {
        return Err(Error::NoAuxiliaryFactor);
    }
    let (n, d) = (layout.aux_dim(), layout.local_dim());
    if op.nrows() != n * d || op.ncols() != n * d || g.dim() != d {
        return Err(Error::DimensionMismatch { expected: n * d, found: op.nrows() });
    }
    let chain = layout.chain_dim();
    let stride = layout.stride(site);
    let mut nz: Vec<(usize, usize, usize, usize, C64)> = Vec::new();
    for a in 0..n {
        for c in 0..d {
            for b in 0..n {
                for e in 0..d {
                    let v = op[(a * d + c, b * d + e)];
                    if v != ZERO {
                        nz.push((a, c, b, e, v));
                    }
                }
            }
        }
    }
    let mut out = SparseOp::new(n * chain);
    for col in 0..chain {
        let e0 = layout.digit(col, site);
        for &(a, c, b, e, v) in &nz {
            if e != e0 {
                continue;
            }
            let row = col - e * stride + c * stride;
            let ph = if c == e { C64::new(1.0, 0.0) } else { layout.string(col, site, |m| g.ratio(m, c, e)) };
            out.push(a * chain + row, b * chain + col, v * ph);
        }
    }
    Ok(out)
}

/// `Σ_a w(a,a)^{-1} T^a_a`.
pub fn graded_partial_trace(t: &ChainOperator, g_aux: &GradingTable) -> Result<ChainOperator> {
    if !t.layout.has_aux() {
        return Err(Error::NoAuxiliaryFactor);
    }
    let n = t.layout.aux_dim();
    if g_aux.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g_aux.dim() });
    }
    let d = t.layout.chain_dim();
    let mut out = Matrix::zeros(d, d);
    for a in 0..n {
        out += t.matrix.view((a * d, a * d), (d, d)) * g_aux.w_inv(a, a);
    }
    ChainOperator::new(t.layout.without_aux(), out)
}
