use serde::{Deserialize, Serialize};

use crate::chain::{ModelKind, ModelSpec, Sector, Statistics};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

const I: C64 = C64::new(0.0, 1.0);

/// Denominators below this modulus count as vanishing.
const POLE_GUARD: f64 = 1e-14;

/// Distance from `±iη/2` within which a pair of XXX roots is read as the
/// exact singular pair.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Minimum separation of two roots of the same level.
pub const MIN_SEPARATION: f64 = 1e-8;

/// A Bethe rapidity. `Infinite` stands for a root sent to infinity; every
/// scattering factor it enters tends to 1 and it carries no energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rapidity {
    Finite(C64),
    Infinite,
}

impl Rapidity {
    pub fn finite(&self) -> Option<C64> {
        match *self {
            Rapidity::Finite(z) => Some(z),
            Rapidity::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Rapidity::Infinite)
    }
}

fn finite(values: &[C64]) -> Vec<Rapidity> {
    values.iter().map(|&z| Rapidity::Finite(z)).collect()
}

/// Roots of the anyonic XXX chain in the rescaled (real-centred) variables `v_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRootsXxx {
    pub num_sites: usize,
    pub eta: C64,
    pub q: C64,
    pub roots: Vec<Rapidity>,
}

/// Roots of the anyonic t–J chain: `N` charge rapidities `u_i` and `M` spin
/// rapidities `v_l`, both rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRootsTj {
    pub num_sites: usize,
    pub eta: C64,
    pub q1: C64,
    pub q2: C64,
    pub q3: C64,
    pub charge: Vec<Rapidity>,
    pub spin: Vec<Rapidity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum BetheRoots {
    Xxx(BetheRootsXxx),
    Tj(BetheRootsTj),
}

impl BetheRootsXxx {
    pub fn new(model: &ModelSpec, roots: Vec<Rapidity>) -> Result<Self> {
        match model.stats {
            Statistics::Xxx { q } => Ok(BetheRootsXxx { num_sites: model.num_sites, eta: model.eta, q, roots }),
            _ => Err(Error::InvalidConfig("XXX roots need an XXX model".into())),
        }
    }

    pub fn from_values(model: &ModelSpec, roots: &[C64]) -> Result<Self> {
        Self::new(model, finite(roots))
    }

    pub fn num_magnons(&self) -> usize {
        self.roots.len()
    }

    /// Unrescaled variables `w_α = −i v_α − η/2`.
    pub fn unrescaled(&self) -> Vec<Option<C64>> {
        self.roots.iter().map(|r| r.finite().map(|v| -I * v - self.eta / 2.0)).collect()
    }

    /// Indices of an exact pair `{iη/2, −iη/2}`, if the set contains one.
    pub fn singular_pair(&self) -> Option<(usize, usize)> {
        let find = |target: C64| {
            self.roots.iter().position(|r| r.finite().is_some_and(|v| (v - target).norm() < SINGULAR_TOL))
        };
        Some((find(I * self.eta / 2.0)?, find(-I * self.eta / 2.0)?))
    }
}

impl BetheRootsTj {
    pub fn new(model: &ModelSpec, charge: Vec<Rapidity>, spin: Vec<Rapidity>) -> Result<Self> {
        match model.stats {
            Statistics::Tj { q1, q2, q3 } => {
                if spin.len() > charge.len() {
                    return Err(Error::InvalidConfig(format!(
                        "{} spin roots exceed {} charge roots",
                        spin.len(),
                        charge.len()
                    )));
                }
                Ok(BetheRootsTj { num_sites: model.num_sites, eta: model.eta, q1, q2, q3, charge, spin })
            }
            _ => Err(Error::InvalidConfig("t–J roots need a t–J model".into())),
        }
    }

    pub fn from_values(model: &ModelSpec, charge: &[C64], spin: &[C64]) -> Result<Self> {
        Self::new(model, finite(charge), finite(spin))
    }

    pub fn num_particles(&self) -> usize {
        self.charge.len()
    }

    pub fn num_down(&self) -> usize {
        self.spin.len()
    }

    /// Unrescaled charge variables `−i u_i − η/2`.
    pub fn unrescaled_charge(&self) -> Vec<Option<C64>> {
        self.charge.iter().map(|r| r.finite().map(|u| -I * u - self.eta / 2.0)).collect()
    }

    /// Unrescaled spin variables `−i v_l − η`.
    pub fn unrescaled_spin(&self) -> Vec<Option<C64>> {
        self.spin.iter().map(|r| r.finite().map(|v| -I * v - self.eta)).collect()
    }
}

impl BetheRoots {
    pub fn kind(&self) -> ModelKind {
        match self {
            BetheRoots::Xxx(_) => ModelKind::Xxx,
            BetheRoots::Tj(_) => ModelKind::Tj,
        }
    }

    pub fn sector(&self) -> Sector {
        match self {
            BetheRoots::Xxx(r) => Sector::xxx(r.num_magnons()),
            BetheRoots::Tj(r) => Sector::tj(r.num_particles(), r.num_down()),
        }
    }

    /// Root levels in order (one for XXX, charge then spin for t–J).
    pub fn levels(&self) -> Vec<&[Rapidity]> {
        match self {
            BetheRoots::Xxx(r) => vec![&r.roots],
            BetheRoots::Tj(r) => vec![&r.charge, &r.spin],
        }
    }

    pub fn levels_mut(&mut self) -> Vec<&mut Vec<Rapidity>> {
        match self {
            BetheRoots::Xxx(r) => vec![&mut r.roots],
            BetheRoots::Tj(r) => vec![&mut r.charge, &mut r.spin],
        }
    }

    pub fn residual(&self) -> Result<Vec<C64>> {
        match self {
            BetheRoots::Xxx(r) => xxx_bae_residual(r),
            BetheRoots::Tj(r) => tj_bae_residual(r),
        }
    }

    pub fn max_residual(&self) -> Result<f64> {
        Ok(self.residual()?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Largest `|lhs − rhs| / max(1, |lhs|, |rhs|)` over the equations.
    pub fn relative_residual(&self) -> Result<f64> {
        let sides = match self {
            BetheRoots::Xxx(r) => xxx_sides(r)?,
            BetheRoots::Tj(r) => tj_sides(r)?,
        };
        Ok(sides.iter().map(|(l, r)| (l - r).norm() / l.norm().max(r.norm()).max(1.0)).fold(0.0, f64::max))
    }

    pub fn lambda(&self, lambda: C64) -> Result<C64> {
        match self {
            BetheRoots::Xxx(r) => xxx_lambda(lambda, r),
            BetheRoots::Tj(r) => tj_lambda(lambda, r),
        }
    }

    pub fn energy(&self) -> Result<C64> {
        match self {
            BetheRoots::Xxx(r) => xxx_energy(r),
            BetheRoots::Tj(r) => tj_energy(r),
        }
    }

    /// Relative residues of Λ at every finite pole, level by level.
    pub fn residues(&self) -> Vec<f64> {
        eigenvalue_form(self).residues()
    }

    /// First pair of finite roots in one level closer than [`MIN_SEPARATION`].
    /// Repeated infinite roots are allowed; they stand for symmetry descendants.
    pub fn degeneracy(&self) -> Option<(usize, usize)> {
        let mut offset = 0;
        for level in self.levels() {
            for a in 0..level.len() {
                for b in 0..a {
                    let close = match (level[a], level[b]) {
                        (Rapidity::Finite(x), Rapidity::Finite(y)) => (x - y).norm() < MIN_SEPARATION,
                        _ => false,
                    };
                    if close {
                        return Some((offset + b, offset + a));
                    }
                }
            }
            offset += level.len();
        }
        None
    }

    /// True when each level equals its own complex conjugate as a multiset.
    pub fn conjugation_closed(&self, tol: f64) -> bool {
        self.levels().iter().all(|level| {
            level.iter().all(|r| match r {
                Rapidity::Infinite => true,
                Rapidity::Finite(z) => level.iter().any(|s| s.finite().is_some_and(|w| (w - z.conj()).norm() < tol)),
            })
        })
    }

    /// Sorts each level by (re, im), infinite roots last.
    pub fn canonicalize(&mut self) {
        for level in self.levels_mut() {
            level.sort_by(|a, b| match (a, b) {
                (Rapidity::Finite(x), Rapidity::Finite(y)) => x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)),
                (Rapidity::Finite(_), Rapidity::Infinite) => std::cmp::Ordering::Less,
                (Rapidity::Infinite, Rapidity::Finite(_)) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            });
        }
    }

    /// Permutation-invariant comparison level by level.
    pub fn same_set(&self, other: &BetheRoots, tol: f64) -> bool {
        let (a, b) = (self.levels(), other.levels());
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| same_multiset(x, y, tol))
    }
}

fn same_multiset(a: &[Rapidity], b: &[Rapidity], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .filter(|(_, y)| match (x, y) {
                (Rapidity::Finite(p), Rapidity::Finite(s)) => (p - s).norm() < tol,
                (Rapidity::Infinite, Rapidity::Infinite) => true,
                _ => false,
            })
            .min_by(|(_, y), (_, z)| {
                let d = |r: &Rapidity| match (x, r) {
                    (Rapidity::Finite(p), Rapidity::Finite(s)) => (p - s).norm(),
                    _ => 0.0,
                };
                d(y).total_cmp(&d(z))
            })
            .map(|(k, _)| k);
        match best {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

/// `(x + c)/(x − c)`, or `PoleAtRoot` when the denominator vanishes.
fn ratio(x: C64, c: C64, index: usize) -> Result<C64> {
    let den = x - c;
    if den.norm() < POLE_GUARD {
        return Err(Error::PoleAtRoot { index });
    }
    Ok((x + c) / den)
}

/// Residuals `((v_α+iη/2)/(v_α−iη/2))^L − q^{M−1} Π_{β≠α} (v_α−v_β+iη)/(v_α−v_β−iη)`.
///
/// An infinite root contributes factor 1 to the other equations and its own
/// equation reduces to `1 − q^{M−1}`. For the singular pair `{±iη/2}` both
/// equations are replaced by the regularity condition
/// `(−Π_{β∉pair} (v_β+iη/2)/(v_β−iη/2))^L = 1`, which needs `q^{M−1} = 1`.
pub fn xxx_bae_residual(r: &BetheRootsXxx) -> Result<Vec<C64>> {
    Ok(xxx_sides(r)?.into_iter().map(|(l, r)| l - r).collect())
}

fn xxx_sides(r: &BetheRootsXxx) -> Result<Vec<(C64, C64)>> {
    let m = r.roots.len();
    let l = r.num_sites as i32;
    let pref = r.q.powi(m as i32 - 1);
    let eta = r.eta;
    let pair = r.singular_pair();
    let regular = match pair {
        Some((p, s)) => {
            if (pref - ONE).norm() > 1e-12 {
                return Err(Error::InvalidConfig("a singular pair needs q^(M-1) = 1".into()));
            }
            let mut prod = -ONE;
            for (b, rb) in r.roots.iter().enumerate() {
                if let (true, Some(vb)) = (b != p && b != s, rb.finite()) {
                    prod *= ratio(vb, I * eta / 2.0, b)?;
                }
            }
            prod.powi(l)
        }
        None => ONE,
    };
    let mut out = Vec::with_capacity(m);
    for (a, ra) in r.roots.iter().enumerate() {
        if pair.is_some_and(|(p, s)| a == p || a == s) {
            out.push((regular, ONE));
            continue;
        }
        let Some(va) = ra.finite() else {
            out.push((ONE, pref));
            continue;
        };
        let lhs = ratio(va, I * eta / 2.0, a)?.powi(l);
        let mut rhs = pref;
        for (b, rb) in r.roots.iter().enumerate() {
            if let (true, Some(vb)) = (a != b, rb.finite()) {
                rhs *= ratio(va - vb, I * eta, a)?;
            }
        }
        out.push((lhs, rhs));
    }
    Ok(out)
}

/// Residuals of the same equations written in `w_α = −i v_α − η/2`:
/// `((w_α+η)/w_α)^L − q^{M−1} Π_{β≠α} (w_α−w_β+η)/(w_α−w_β−η)`.
pub fn xxx_bae_residual_unrescaled(r: &BetheRootsXxx) -> Result<Vec<C64>> {
    let w = r.unrescaled();
    let m = w.len();
    let pref = r.q.powi(m as i32 - 1);
    let eta = r.eta;
    let mut out = Vec::with_capacity(m);
    for (a, wa) in w.iter().enumerate() {
        let Some(wa) = *wa else {
            out.push(ONE - pref);
            continue;
        };
        if wa.norm() < POLE_GUARD {
            return Err(Error::PoleAtRoot { index: a });
        }
        let lhs = ((wa + eta) / wa).powi(r.num_sites as i32);
        let mut rhs = pref;
        for (b, wb) in w.iter().enumerate() {
            if let (true, Some(wb)) = (a != b, *wb) {
                let x = wa - wb;
                if (x - eta).norm() < POLE_GUARD {
                    return Err(Error::PoleAtRoot { index: a });
                }
                rhs *= (x + eta) / (x - eta);
            }
        }
        out.push(lhs - rhs);
    }
    Ok(out)
}

/// Charge residuals followed by spin residuals of the nested equations.
pub fn tj_bae_residual(r: &BetheRootsTj) -> Result<Vec<C64>> {
    Ok(tj_sides(r)?.into_iter().map(|(l, r)| l - r).collect())
}

fn tj_sides(r: &BetheRootsTj) -> Result<Vec<(C64, C64)>> {
    let n = r.charge.len() as i32;
    let m = r.spin.len() as i32;
    let eta = r.eta;
    let l = r.num_sites as i32;
    let charge_pref = r.q2.powi(n - m - 1) * r.q3.powi(m);
    let spin_pref = r.q1.powi(m - 1) * r.q2.powi(-(n - m - 1)) * r.q3.powi(n - 2 * m);
    let mut out = Vec::with_capacity((n + m) as usize);
    for (i, ri) in r.charge.iter().enumerate() {
        let Some(ui) = ri.finite() else {
            out.push((ONE, charge_pref));
            continue;
        };
        let lhs = ratio(ui, I * eta / 2.0, i)?.powi(l);
        let mut rhs = charge_pref;
        for (k, rk) in r.charge.iter().enumerate() {
            if let (true, Some(uk)) = (k != i, rk.finite()) {
                rhs *= ratio(ui - uk, I * eta, i)?;
            }
        }
        for v in r.spin.iter().filter_map(Rapidity::finite) {
            rhs *= ratio(ui - v, -I * eta / 2.0, i)?;
        }
        out.push((lhs, rhs));
    }
    for (j, rj) in r.spin.iter().enumerate() {
        let index = n as usize + j;
        let Some(vj) = rj.finite() else {
            out.push((spin_pref, ONE));
            continue;
        };
        let mut lhs = spin_pref;
        for u in r.charge.iter().filter_map(Rapidity::finite) {
            lhs *= ratio(vj - u, -I * eta / 2.0, index)?;
        }
        let mut rhs = ONE;
        for (k, rk) in r.spin.iter().enumerate() {
            if let (true, Some(vk)) = (k != j, rk.finite()) {
                rhs *= ratio(vj - vk, -I * eta, index)?;
            }
        }
        out.push((lhs, rhs));
    }
    Ok(out)
}

/// One term `coef · (λ + base)^L · Π (λ − p + shift)/(λ − p)` of a transfer
/// eigenvalue, the product running over the poles `p` of the listed levels.
struct Term {
    coef: C64,
    base: C64,
    factors: Vec<(usize, C64)>,
}

struct EigenvalueForm {
    num_sites: i32,
    poles: Vec<Vec<Option<C64>>>,
    terms: Vec<Term>,
}

fn eigenvalue_form(roots: &BetheRoots) -> EigenvalueForm {
    match roots {
        BetheRoots::Xxx(r) => {
            let m = r.roots.len() as i32;
            EigenvalueForm {
                num_sites: r.num_sites as i32,
                poles: vec![r.unrescaled()],
                terms: vec![
                    Term { coef: ONE, base: r.eta, factors: vec![(0, -r.eta)] },
                    Term { coef: r.q.powi(m - 1), base: ZERO, factors: vec![(0, r.eta)] },
                ],
            }
        }
        BetheRoots::Tj(r) => {
            let n = r.charge.len() as i32;
            let m = r.spin.len() as i32;
            EigenvalueForm {
                num_sites: r.num_sites as i32,
                poles: vec![r.unrescaled_charge(), r.unrescaled_spin()],
                terms: vec![
                    Term { coef: ONE, base: r.eta, factors: vec![(0, -r.eta)] },
                    Term { coef: r.q1.powi(m - 1) * r.q3.powi(n - m), base: ZERO, factors: vec![(1, r.eta)] },
                    Term {
                        coef: r.q2.powi(n - m - 1) * r.q3.powi(m),
                        base: ZERO,
                        factors: vec![(0, r.eta), (1, -r.eta)],
                    },
                ],
            }
        }
    }
}

impl EigenvalueForm {
    fn eval(&self, lambda: C64) -> Result<C64> {
        for p in self.poles.iter().flatten().flatten() {
            if (lambda - p).norm() < POLE_GUARD {
                return Err(Error::PoleAtLambda { lambda });
            }
        }
        Ok(self.terms.iter().map(|t| self.term_at(t, lambda, None)).sum())
    }

    /// Value of a term at `lambda`, with the factor of pole `skip` replaced by
    /// its residue numerator.
    fn term_at(&self, t: &Term, lambda: C64, skip: Option<(usize, usize)>) -> C64 {
        let mut v = t.coef * (lambda + t.base).powi(self.num_sites);
        for &(level, shift) in &t.factors {
            for (k, p) in self.poles[level].iter().enumerate() {
                let Some(p) = *p else { continue };
                if skip == Some((level, k)) {
                    v *= shift;
                } else {
                    v *= (lambda - p + shift) / (lambda - p);
                }
            }
        }
        v
    }

    fn residues(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (level, poles) in self.poles.iter().enumerate() {
            for (k, p) in poles.iter().enumerate() {
                let Some(p) = *p else { continue };
                let mut total = ZERO;
                let mut scale = 0.0;
                for t in self.terms.iter().filter(|t| t.factors.iter().any(|f| f.0 == level)) {
                    let v = self.term_at(t, p, Some((level, k)));
                    total += v;
                    scale += v.norm();
                }
                out.push(if scale > 0.0 { total.norm() / scale } else { 0.0 });
            }
        }
        out
    }
}

/// `Λ(λ) = (λ+η)^L Π (λ−w_α−η)/(λ−w_α) + λ^L q^{M−1} Π (λ−w_α+η)/(λ−w_α)`.
pub fn xxx_lambda(lambda: C64, r: &BetheRootsXxx) -> Result<C64> {
    eigenvalue_form(&BetheRoots::Xxx(r.clone())).eval(lambda)
}

/// Three-term t–J transfer eigenvalue in the unrescaled variables.
pub fn tj_lambda(lambda: C64, r: &BetheRootsTj) -> Result<C64> {
    eigenvalue_form(&BetheRoots::Tj(r.clone())).eval(lambda)
}

fn energy_sum(roots: &[Rapidity], eta: C64) -> Result<C64> {
    let mut sum = ZERO;
    for (k, v) in roots.iter().enumerate() {
        let Some(v) = v.finite() else { continue };
        let den = v * v + eta * eta / 4.0;
        if den.norm() < POLE_GUARD {
            return Err(Error::PoleAtRoot { index: k });
        }
        sum += ONE / den;
    }
    Ok(sum)
}

/// `E = −η Σ_α 1/(v_α² + η²/4)`, an eigenvalue of `H`. The two poles of a
/// singular pair cancel, leaving `−2/η` in their place.
pub fn xxx_energy(r: &BetheRootsXxx) -> Result<C64> {
    match r.singular_pair() {
        Some((p, s)) => {
            let rest: Vec<Rapidity> =
                r.roots.iter().enumerate().filter(|&(k, _)| k != p && k != s).map(|(_, v)| *v).collect();
            Ok(-r.eta * energy_sum(&rest, r.eta)? - 2.0 / r.eta)
        }
        None => Ok(-r.eta * energy_sum(&r.roots, r.eta)?),
    }
}

/// `E = L − η² Σ_i 1/(u_i² + η²/4)`, an eigenvalue of `ηH`.
pub fn tj_energy(r: &BetheRootsTj) -> Result<C64> {
    Ok(C64::new(r.num_sites as f64, 0.0) - r.eta * r.eta * energy_sum(&r.charge, r.eta)?)
}
