use serde::{Deserialize, Serialize};

use super::lax::LaxSpec;
use super::r_matrix::RMatrixSpec;
use crate::error::{Error, Result};
use crate::graded::{
    anyonic_permutation, graded_tensor_multi, string_transparency_check, GradingTable, PermutationVariant,
};
use crate::linalg::{identity, kron, max_abs_diff, Matrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub re: f64,
    pub im: f64,
}

impl Param {
    pub fn new(name: &str, z: C64) -> Self {
        Param { name: name.to_string(), re: z.re, im: z.im }
    }
}

/// Residual of one identity at one parameter point, or the worst over many.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub parameters: Vec<Param>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    /// Set when the residual overflowed to NaN or infinity.
    pub nan: bool,
    /// Secondary residuals that do not gate the status.
    pub diagnostics: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn new(identity: &str, parameters: Vec<Param>, residual: f64, tolerance: f64) -> Self {
        let nan = !residual.is_finite();
        let status = if !nan && residual <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        ResidualReport {
            identity: identity.to_string(),
            parameters,
            max_residual: residual,
            tolerance,
            status,
            nan,
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// Worst of several reports of the same identity; NaN dominates, and the
    /// parameters of the worst sample are kept.
    pub fn worst(identity: &str, reports: impl IntoIterator<Item = ResidualReport>) -> Option<ResidualReport> {
        let mut out: Option<ResidualReport> = None;
        let mut any_fail = false;
        let mut all_na = true;
        let mut diag: Vec<(String, f64)> = Vec::new();
        for r in reports {
            any_fail |= r.status == CheckStatus::Fail;
            all_na &= r.status == CheckStatus::NotApplicable;
            for (name, v) in &r.diagnostics {
                match diag.iter_mut().find(|(n, _)| n == name) {
                    Some(entry) => entry.1 = entry.1.max(*v),
                    None => diag.push((name.clone(), *v)),
                }
            }
            let replace = match &out {
                None => true,
                Some(cur) => (r.nan && !cur.nan) || (!cur.nan && r.max_residual > cur.max_residual),
            };
            if replace {
                out = Some(r);
            }
        }
        out.map(|mut r| {
            r.identity = identity.to_string();
            r.status = if all_na {
                CheckStatus::NotApplicable
            } else if any_fail || r.nan {
                CheckStatus::Fail
            } else {
                CheckStatus::Pass
            };
            r.diagnostics = diag;
            r
        })
    }
}

/// Component-form Yang–Baxter check of a braid-form R-matrix.
///
/// The gate is the ordinary component identity
/// `Ř₂₃(λ−μ) Ř₁₂(λ) Ř₂₃(μ) = Ř₁₂(μ) Ř₂₃(λ) Ř₁₂(λ−μ)`, valid without
/// extra phases when Ř is string transparent; if it is not, the status is
/// `NotApplicable`. Diagnostics carry the same identity with `⊗_a`-built
/// factors, and the `R = PŘ` form with `R₁₃ = P₂₃ R₁₂ P₂₃⁻¹`.
pub fn check_ybe(r: &RMatrixSpec, lambda: C64, mu: C64, tol: f64) -> ResidualReport {
    let d = r.local_dim();
    let g = &r.grading;
    let x = r.evaluate(lambda - mu);
    let y = r.evaluate(lambda);
    let z = r.evaluate(mu);
    let idx = |i: usize, j: usize| i * d + j;

    let mut worst = 0.0_f64;
    for a1 in 0..d {
        for a2 in 0..d {
            for a3 in 0..d {
                for b1 in 0..d {
                    for b2 in 0..d {
                        for b3 in 0..d {
                            let mut lhs = C64::new(0.0, 0.0);
                            let mut rhs = C64::new(0.0, 0.0);
                            for c2 in 0..d {
                                for c3 in 0..d {
                                    let xv = x[(idx(a2, a3), idx(c2, c3))];
                                    if xv.norm() == 0.0 {
                                        continue;
                                    }
                                    for d2 in 0..d {
                                        lhs += xv * y[(idx(a1, c2), idx(b1, d2))] * z[(idx(d2, c3), idx(b2, b3))];
                                    }
                                }
                            }
                            for c1 in 0..d {
                                for c2 in 0..d {
                                    let zv = z[(idx(a1, a2), idx(c1, c2))];
                                    if zv.norm() == 0.0 {
                                        continue;
                                    }
                                    for d2 in 0..d {
                                        rhs += zv * y[(idx(c2, a3), idx(d2, b3))] * x[(idx(c1, d2), idx(b1, b2))];
                                    }
                                }
                            }
                            worst = worst.max((lhs - rhs).norm());
                        }
                    }
                }
            }
        }
    }

    let params = vec![Param::new("lambda", lambda), Param::new("mu", mu), Param::new("eta", r.eta)];
    let mut report = ResidualReport::new("ybe_component", params, worst, tol);

    let transparency = string_transparency_check(&y, g);
    report.diagnostics.push(("string_transparency_violation".into(), transparency.worst));
    if !transparency.transparent {
        report.status = CheckStatus::NotApplicable;
    }

    let id = identity(d);
    let pair = [g, g];
    let left = |m: &Matrix| graded_tensor_multi(&[(m, &pair[..]), (&id, &pair[..1])]);
    let right = |m: &Matrix| graded_tensor_multi(&[(&id, &pair[..1]), (m, &pair[..])]);
    let graded = (|| -> Result<f64> {
        let lhs = right(&x)? * left(&y)? * right(&z)?;
        let rhs = left(&z)? * right(&y)? * left(&x)?;
        Ok(max_abs_diff(&lhs, &rhs))
    })();
    report.diagnostics.push(("ybe_graded_tensor_form".into(), graded.unwrap_or(f64::NAN)));

    if let Ok(p) = anyonic_permutation(g, g, PermutationVariant::P) {
        let pi = anyonic_permutation(g, g, PermutationVariant::PInverse).expect("same tables as P");
        let rr = |m: &Matrix| &p * m;
        let r12 = |m: &Matrix| kron(&rr(m), &id);
        let r23 = |m: &Matrix| kron(&id, &rr(m));
        let p23 = kron(&id, &p);
        let p23i = kron(&id, &pi);
        let r13 = |m: &Matrix| &p23 * r12(m) * &p23i;
        let lhs = r12(&x) * r13(&y) * r23(&z);
        let rhs = r23(&z) * r13(&y) * r12(&x);
        report.diagnostics.push(("ybe_permuted_form".into(), max_abs_diff(&lhs, &rhs)));
    }
    report
}

fn check_rll_gradings(r: &RMatrixSpec, l: &LaxSpec) -> Result<()> {
    if r.local_dim() != l.aux_dim() {
        return Err(Error::GradingMismatch(format!(
            "R acts on {}-dimensional spaces, Lax auxiliary space has dimension {}",
            r.local_dim(),
            l.aux_dim()
        )));
    }
    if !r.grading.is_leading_block_of(&l.aux_grading) {
        return Err(Error::GradingMismatch("R grading differs from the Lax auxiliary grading".into()));
    }
    GradingTable::cross(&l.aux_grading, &l.quantum_grading)?;
    Ok(())
}

/// Component-form RLL relation with explicit grading factors:
///
/// `Ř^{a1a2}_{c1c2} L(λ)^{c1 an}_{b1 rn} L(μ)^{c2 rn}_{b2 bn} w(b1,c2) w⁻¹(c1,c2)
///  = L(μ)^{a1 an}_{c1 rn} L(λ)^{a2 rn}_{c2 bn} Ř^{c1c2}_{b1b2} w(c1,a2) w⁻¹(a1,a2)`
///
/// with `Ř = Ř(λ−μ)`, summed over `c1, c2, rn`. The matrix form on
/// `aux ⊗ aux ⊗ quantum` (first Lax leg dressed by graded insertion of the
/// second auxiliary space) is reported as a diagnostic.
pub fn check_rll(r: &RMatrixSpec, l: &LaxSpec, lambda: C64, mu: C64, tol: f64) -> Result<ResidualReport> {
    check_rll_gradings(r, l)?;
    let n = l.aux_dim();
    let d = l.quantum_dim();
    let w = &l.aux_grading;
    let rm = r.evaluate(lambda - mu);
    let ll = l.evaluate(lambda)?;
    let lm = l.evaluate(mu)?;
    let ri = |i: usize, j: usize| i * n + j;
    let li = |a: usize, s: usize| a * d + s;

    let mut worst = 0.0_f64;
    for a1 in 0..n {
        for a2 in 0..n {
            for an in 0..d {
                for b1 in 0..n {
                    for b2 in 0..n {
                        for bn in 0..d {
                            let mut lhs = C64::new(0.0, 0.0);
                            let mut rhs = C64::new(0.0, 0.0);
                            for c1 in 0..n {
                                for c2 in 0..n {
                                    let rv = rm[(ri(a1, a2), ri(c1, c2))];
                                    let ph_l = w.w(b1, c2) * w.w_inv(c1, c2);
                                    let ph_r = w.w(c1, a2) * w.w_inv(a1, a2);
                                    let rv2 = rm[(ri(c1, c2), ri(b1, b2))];
                                    for rn in 0..d {
                                        if rv.norm() != 0.0 {
                                            lhs += rv * ll[(li(c1, an), li(b1, rn))] * lm[(li(c2, rn), li(b2, bn))] * ph_l;
                                        }
                                        if rv2.norm() != 0.0 {
                                            rhs += lm[(li(a1, an), li(c1, rn))] * ll[(li(a2, rn), li(c2, bn))] * rv2 * ph_r;
                                        }
                                    }
                                }
                            }
                            worst = worst.max((lhs - rhs).norm());
                        }
                    }
                }
            }
        }
    }
    let params = vec![Param::new("lambda", lambda), Param::new("mu", mu), Param::new("eta", l.eta)];
    let mut report = ResidualReport::new("rll_component", params, worst, tol);
    report.diagnostics.push(("rll_matrix_form".into(), rll_matrix_form_residual(r, l, lambda, mu)?));
    Ok(report)
}

/// Embeds an ordinary matrix on `aux ⊗ quantum` into `aux ⊗ aux' ⊗ quantum`
/// with the graded identity on the middle factor.
fn insert_middle(op: &Matrix, n: usize, d: usize, middle: usize, w: &GradingTable) -> Matrix {
    let mut out = Matrix::zeros(n * middle * d, n * middle * d);
    for a in 0..n {
        for b in 0..n {
            for c in 0..d {
                for e in 0..d {
                    let v = op[(a * d + c, b * d + e)];
                    if v.norm() == 0.0 {
                        continue;
                    }
                    for k in 0..middle {
                        out[((a * middle + k) * d + c, (b * middle + k) * d + e)] = v * w.ratio(k, c, e);
                    }
                }
            }
        }
    }
    out
}

/// `max |(Ř⊗I) L₁(λ) L₂(μ) − L₁(μ) L₂(λ) (Ř⊗I)|` on `aux ⊗ aux ⊗ quantum`.
pub fn rll_matrix_form_residual(r: &RMatrixSpec, l: &LaxSpec, lambda: C64, mu: C64) -> Result<f64> {
    check_rll_gradings(r, l)?;
    let n = l.aux_dim();
    let d = l.quantum_dim();
    let w = GradingTable::cross(&l.aux_grading, &l.quantum_grading)?;
    let rb = kron(&r.evaluate(lambda - mu), &identity(d));
    let l1 = |x: C64| -> Result<Matrix> { Ok(insert_middle(&l.evaluate(x)?, n, d, n, w)) };
    let l2 = |x: C64| -> Result<Matrix> { Ok(kron(&identity(n), &l.evaluate(x)?)) };
    let lhs = &rb * l1(lambda)? * l2(mu)?;
    let rhs = l1(mu)? * l2(lambda)? * &rb;
    Ok(max_abs_diff(&lhs, &rhs))
}
