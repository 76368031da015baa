use super::model::{ModelKind, ModelSpec, Statistics};
use crate::error::Result;
use crate::graded::{embed_local, ChainLayout};
use crate::integrability::{Param, ResidualReport};
use crate::linalg::{max_abs, unit, Matrix, C64};

/// Local basis of the XXX chain: `|0⟩` (index 0) and `|1⟩` (index 1).
pub mod xxx_local {
    pub const EMPTY: usize = 0;
    pub const OCCUPIED: usize = 1;
}

/// Local basis of the t–J chain: `|↓⟩`, `|↑⟩`, hole.
pub mod tj_local {
    pub const DOWN: usize = 0;
    pub const UP: usize = 1;
    pub const HOLE: usize = 2;
}

/// Embedded anyon operators of the XXX chain; vectors are indexed by site − 1.
#[derive(Debug, Clone)]
pub struct XxxOperators {
    pub a: Vec<Matrix>,
    pub adag: Vec<Matrix>,
    pub n: Vec<Matrix>,
}

/// Embedded operators of the t–J chain; vectors are indexed by site − 1.
#[derive(Debug, Clone)]
pub struct TjOperators {
    pub a_dn: Vec<Matrix>,
    pub a_up: Vec<Matrix>,
    pub adag_dn: Vec<Matrix>,
    pub adag_up: Vec<Matrix>,
    pub n_dn: Vec<Matrix>,
    pub n_up: Vec<Matrix>,
    /// `a†_↑ a_↓`
    pub s_plus: Vec<Matrix>,
    /// `a†_↓ a_↑`
    pub s_minus: Vec<Matrix>,
    pub s_z: Vec<Matrix>,
}

#[derive(Debug, Clone)]
pub enum SiteOperators {
    Xxx(XxxOperators),
    Tj(TjOperators),
}

#[derive(Debug, Clone)]
pub struct ChainOperators {
    pub layout: ChainLayout,
    pub ops: SiteOperators,
}

pub fn build_site_operators(model: &ModelSpec) -> Result<ChainOperators> {
    let layout = model.layout();
    model.check_cap(layout.total_dim())?;
    let g = model.grading();
    let d = model.local_dim();
    let sites = 1..=model.num_sites;
    let emb = |x: &Matrix| -> Result<Vec<Matrix>> {
        sites.clone().map(|j| embed_local(x, j, layout, &g, None).map(|o| o.matrix)).collect()
    };
    let e = |i, j| unit(d, i, j);
    let ops = match model.kind() {
        ModelKind::Xxx => {
            use xxx_local::*;
            SiteOperators::Xxx(XxxOperators {
                a: emb(&e(EMPTY, OCCUPIED))?,
                adag: emb(&e(OCCUPIED, EMPTY))?,
                n: emb(&e(OCCUPIED, OCCUPIED))?,
            })
        }
        ModelKind::Tj => {
            use tj_local::*;
            let n_dn = emb(&e(DOWN, DOWN))?;
            let n_up = emb(&e(UP, UP))?;
            let s_z = n_up.iter().zip(&n_dn).map(|(u, d)| (u - d) * C64::new(0.5, 0.0)).collect();
            SiteOperators::Tj(TjOperators {
                a_dn: emb(&e(HOLE, DOWN))?,
                a_up: emb(&e(HOLE, UP))?,
                adag_dn: emb(&e(DOWN, HOLE))?,
                adag_up: emb(&e(UP, HOLE))?,
                s_plus: emb(&e(UP, DOWN))?,
                s_minus: emb(&e(DOWN, UP))?,
                n_dn,
                n_up,
                s_z,
            })
        }
    };
    Ok(ChainOperators { layout, ops })
}

/// Checks every on-site and exchange relation of the model's anyon operators
/// for all site pairs `i > j`. The report's residual is the worst over all
/// relations; each relation's own worst residual is listed in `diagnostics`.
///
/// For the t–J chain the on-site anticommutator is checked in the projected
/// form `{a_{jα}, a†_{jα}} = 1 − n_{j,−α}`, the only form available without
/// double occupancy.
pub fn commutation_suite(model: &ModelSpec, tol: f64) -> Result<ResidualReport> {
    let ch = build_site_operators(model)?;
    let dim = ch.layout.total_dim();
    let id = Matrix::identity(dim, dim);
    let l = model.num_sites;
    let mut rel: Vec<(String, f64)> = Vec::new();
    let mut record = |name: &str, v: f64| match rel.iter_mut().find(|(n, _)| n == name) {
        Some(e) => e.1 = e.1.max(v),
        None => rel.push((name.to_string(), v)),
    };
    let anti = |a: &Matrix, b: &Matrix| a * b + b * a;
    let params: Vec<Param>;

    match (&ch.ops, model.stats) {
        (SiteOperators::Xxx(o), Statistics::Xxx { q }) => {
            params = vec![Param::new("q", q)];
            let qi = q.inv();
            for j in 0..l {
                record("{a_j,a_j}=0", max_abs(&anti(&o.a[j], &o.a[j])));
                record("{a†_j,a†_j}=0", max_abs(&anti(&o.adag[j], &o.adag[j])));
                record("{a_j,a†_j}=1", max_abs(&(anti(&o.a[j], &o.adag[j]) - &id)));
                record("n_j=a†_j a_j", max_abs(&(&o.adag[j] * &o.a[j] - &o.n[j])));
            }
            for i in 0..l {
                for j in 0..i {
                    let (a, ad) = (&o.a, &o.adag);
                    record("a†_i a_j = q a_j a†_i", max_abs(&(&ad[i] * &a[j] - &a[j] * &ad[i] * q)));
                    record("a†_j a_i = q⁻¹ a_i a†_j", max_abs(&(&ad[j] * &a[i] - &a[i] * &ad[j] * qi)));
                    record("a†_j a†_i = q a†_i a†_j", max_abs(&(&ad[j] * &ad[i] - &ad[i] * &ad[j] * q)));
                    record("a_j a_i = q a_i a_j", max_abs(&(&a[j] * &a[i] - &a[i] * &a[j] * q)));
                }
            }
        }
        (SiteOperators::Tj(o), Statistics::Tj { q1, q2, q3 }) => {
            params = vec![Param::new("q1", q1), Param::new("q2", q2), Param::new("q3", q3)];
            for j in 0..l {
                for (name, a, ad, other) in [
                    ("↓", &o.a_dn, &o.adag_dn, &o.n_up),
                    ("↑", &o.a_up, &o.adag_up, &o.n_dn),
                ] {
                    record(&format!("{{a_j{name},a_j{name}}}=0"), max_abs(&anti(&a[j], &a[j])));
                    record(&format!("{{a†_j{name},a†_j{name}}}=0"), max_abs(&anti(&ad[j], &ad[j])));
                    record(
                        &format!("{{a_j{name},a†_j{name}}}=1-n_j,-{name}"),
                        max_abs(&(anti(&a[j], &ad[j]) - (&id - &other[j]))),
                    );
                }
                record("S⁺_j=a†_j↑a_j↓", max_abs(&(&o.adag_up[j] * &o.a_dn[j] - &o.s_plus[j])));
                record("S⁻_j=a†_j↓a_j↑", max_abs(&(&o.adag_dn[j] * &o.a_up[j] - &o.s_minus[j])));
            }
            let (ad, au, dd, du) = (&o.a_dn, &o.a_up, &o.adag_dn, &o.adag_up);
            for i in 0..l {
                for j in 0..i {
                    record("a†_i↓a_j↓ = q1 a_j↓a†_i↓", max_abs(&(&dd[i] * &ad[j] - &ad[j] * &dd[i] * q1)));
                    record("a†_i↑a_j↑ = q2 a_j↑a†_i↑", max_abs(&(&du[i] * &au[j] - &au[j] * &du[i] * q2)));
                    record("a†_i↑a_j↓ = q3 a_j↓a†_i↑", max_abs(&(&du[i] * &ad[j] - &ad[j] * &du[i] * q3)));
                    record("a†_i↓a_j↑ = q3 a_j↑a†_i↓", max_abs(&(&dd[i] * &au[j] - &au[j] * &dd[i] * q3)));
                    record("a†_j↓a†_i↓ = q1 a†_i↓a†_j↓", max_abs(&(&dd[j] * &dd[i] - &dd[i] * &dd[j] * q1)));
                    record("a†_j↑a†_i↑ = q2 a†_i↑a†_j↑", max_abs(&(&du[j] * &du[i] - &du[i] * &du[j] * q2)));
                    record("a†_j↓a†_i↑ = q3 a†_i↑a†_j↓", max_abs(&(&dd[j] * &du[i] - &du[i] * &dd[j] * q3)));
                    record("a†_j↑a†_i↓ = q3 a†_i↓a†_j↑", max_abs(&(&du[j] * &dd[i] - &dd[i] * &du[j] * q3)));
                    let lhs = &du[j] * &ad[j] * &dd[i] * &au[i] * (q1 / q3);
                    let rhs = &dd[i] * &au[i] * &du[j] * &ad[j] * (q3 / q2);
                    record("q1q3⁻¹ a†_j↑a_j↓a†_i↓a_i↑ = q3q2⁻¹ a†_i↓a_i↑a†_j↑a_j↓", max_abs(&(lhs - rhs)));
                    let lhs = &du[i] * &ad[i] * &dd[j] * &au[j] * (q3 / q1);
                    let rhs = &dd[j] * &au[j] * &du[i] * &ad[i] * (q2 / q3);
                    record("q3q1⁻¹ a†_i↑a_i↓a†_j↓a_j↑ = q2q3⁻¹ a†_j↓a_j↑a†_i↑a_i↓", max_abs(&(lhs - rhs)));
                }
            }
        }
        _ => unreachable!("operators follow the model kind"),
    }
    let worst = rel.iter().fold(0.0_f64, |acc, (_, v)| acc.max(*v));
    let mut report = ResidualReport::new("commutation_relations", params, worst, tol);
    report.diagnostics = rel;
    Ok(report)
}
