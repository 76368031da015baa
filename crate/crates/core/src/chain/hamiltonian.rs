use serde::{Deserialize, Serialize};

use super::model::{ModelSpec, Statistics, TJ_EXCHANGE, TJ_HOPPING};
use super::operators::{build_site_operators, SiteOperators};
use crate::error::{Error, Result};
use crate::graded::ChainOperator;
use crate::linalg::{Matrix, C64};

/// Periodic bonds `(j, j+1)` with `L+1 ≡ 1`, 0-based.
fn bonds(l: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..l).map(move |j| (j, (j + 1) % l))
}

/// `H = η⁻¹ Σ_j (a†_{j+1} a_j + a†_j a_{j+1} + 2 n_{j+1} n_j − 2 n_j)`, periodic.
pub fn build_xxx_hamiltonian(model: &ModelSpec) -> Result<ChainOperator> {
    let ch = build_site_operators(model)?;
    let SiteOperators::Xxx(o) = &ch.ops else {
        return Err(Error::InvalidConfig("XXX Hamiltonian requested for a t–J model".into()));
    };
    let dim = ch.layout.total_dim();
    let mut h = Matrix::zeros(dim, dim);
    for (j, k) in bonds(model.num_sites) {
        h += &o.adag[k] * &o.a[j] + &o.adag[j] * &o.a[k];
        h += &o.n[k] * &o.n[j] * C64::new(2.0, 0.0);
        h -= &o.n[j] * C64::new(2.0, 0.0);
    }
    ChainOperator::new(ch.layout, h / model.eta)
}

/// Which of the two equivalent spin-exchange realizations to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangeForm {
    /// `S⁺ = a†_↑a_↓`, `S^z = ½(n_↑ − n_↓)`, prefactor `q3/q1`.
    First,
    /// `S⁺ = a†_↓a_↑`, `S^z = ½(n_↓ − n_↑)`, prefactor `q3/q2`.
    Second,
}

/// `ηH` of the t–J chain at `J = 2`, `t = 1`:
/// `t Σ_{j,α} (a†_{jα} a_{j+1,α} + h.c.) + J Σ_j (S_j·S_{j+1} + ¼ n_j n_{j+1}) + Σ_j (1−n_j)(1−n_{j+1})`.
///
/// The exchange is `½(r S⁺_h S⁻_l + r⁻¹ S⁺_l S⁻_h) + S^z_j S^z_{j+1}`, where
/// `h`/`l` are the larger/smaller site index of the bond, so the wrap bond
/// `(L, 1)` uses `h = L`.
pub fn build_tj_hamiltonian(model: &ModelSpec, form: ExchangeForm) -> Result<ChainOperator> {
    let ch = build_site_operators(model)?;
    let (SiteOperators::Tj(o), Statistics::Tj { q1, q2, q3 }) = (&ch.ops, model.stats) else {
        return Err(Error::InvalidConfig("t–J Hamiltonian requested for an XXX model".into()));
    };
    let dim = ch.layout.total_dim();
    let id = Matrix::identity(dim, dim);
    let half = C64::new(0.5, 0.0);
    let (s_plus, s_minus, sign, r) = match form {
        ExchangeForm::First => (&o.s_plus, &o.s_minus, 1.0, q3 / q1),
        ExchangeForm::Second => (&o.s_minus, &o.s_plus, -1.0, q3 / q2),
    };
    let n: Vec<Matrix> = o.n_dn.iter().zip(&o.n_up).map(|(a, b)| a + b).collect();
    let mut h = Matrix::zeros(dim, dim);
    for (j, k) in bonds(model.num_sites) {
        let mut hop = &o.adag_dn[j] * &o.a_dn[k] + &o.adag_up[j] * &o.a_up[k];
        hop += hop.adjoint();
        h += hop * C64::new(TJ_HOPPING, 0.0);

        let (hi, lo) = if k >= j { (k, j) } else { (j, k) };
        let sz = |s: usize| &o.s_z[s] * C64::new(sign, 0.0);
        let exchange = (&s_plus[hi] * &s_minus[lo] * r + &s_plus[lo] * &s_minus[hi] * r.inv()) * half + sz(j) * sz(k);
        h += (exchange + &n[j] * &n[k] * C64::new(0.25, 0.0)) * C64::new(TJ_EXCHANGE, 0.0);
        h += (&id - &n[j]) * (&id - &n[k]);
    }
    ChainOperator::new(ch.layout, h)
}
