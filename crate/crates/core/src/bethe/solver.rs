use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roots::{BetheRoots, BetheRootsTj, BetheRootsXxx, Rapidity};
use crate::chain::{ModelSpec, Sector, Statistics};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, ONE};

const I: C64 = C64::new(0.0, 1.0);
const PI: f64 = std::f64::consts::PI;

/// Roots beyond this modulus are treated as having run off to infinity.
pub const ROOT_INFINITY: f64 = 1e3;
/// Minimum distance of a root from the singular points of the equations.
pub const ADMISSIBLE_GAP: f64 = 1e-5;
/// Tolerance for identifying two root sets.
pub const DEDUP_TOL: f64 = 1e-7;

/// Branch integers of the logarithmic equations, stored doubled so that
/// half-odd values are exact.
/// Phases closer than this to 1 count as untwisted.
const TWIST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub charge_doubled: Vec<i64>,
    pub spin_doubled: Vec<i64>,
}

impl QuantumNumbers {
    pub fn new(charge_doubled: Vec<i64>, spin_doubled: Vec<i64>) -> Self {
        QuantumNumbers { charge_doubled, spin_doubled }
    }

    pub fn charge(&self) -> Vec<f64> {
        self.charge_doubled.iter().map(|&k| k as f64 / 2.0).collect()
    }

    pub fn spin(&self) -> Vec<f64> {
        self.spin_doubled.iter().map(|&k| k as f64 / 2.0).collect()
    }

    fn all(&self) -> Vec<i64> {
        self.charge_doubled.iter().chain(&self.spin_doubled).copied().collect()
    }

    /// Shifts every charge number by `shift` full branches of `L`.
    pub fn shifted(&self, num_sites: usize, shift: i64) -> Self {
        let d = 2 * num_sites as i64 * shift;
        QuantumNumbers {
            charge_doubled: self.charge_doubled.iter().map(|k| k + d).collect(),
            spin_doubled: self.spin_doubled.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    LogNewton,
    Multistart,
    Homotopy,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_newton" => Ok(Strategy::LogNewton),
            "multistart" => Ok(Strategy::Multistart),
            "homotopy" => Ok(Strategy::Homotopy),
            _ => Err(Error::InvalidConfig(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Newton stopping tolerance on the equations being iterated.
    pub tol: f64,
    /// Acceptance bound on the relative product-form residual.
    pub accept_tol: f64,
    pub max_iter: usize,
    pub samples: usize,
    pub seed: u64,
    /// Initial number of phase steps along a homotopy path.
    pub homotopy_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-11, accept_tol: 1e-9, max_iter: 100, samples: 200, seed: 0, homotopy_steps: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheSolution {
    pub roots: BetheRoots,
    pub quantum_numbers: Option<QuantumNumbers>,
    /// Relative product-form residual.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub strategy: Strategy,
    pub sector: Sector,
    pub solutions: Vec<BetheSolution>,
    pub attempts: usize,
    /// Attempts without an admissible converged root set.
    pub failed: usize,
    /// Attempts that reproduced an earlier root set.
    pub duplicates: usize,
    /// Homotopy paths that broke off, with the reason.
    pub path_failures: Vec<String>,
}

/// `c · Θ(z_a − z_b; s)`, `z_b` absent for a bare term.
#[derive(Debug, Clone)]
struct Term {
    coef: i64,
    a: usize,
    b: Option<usize>,
    s: f64,
}

/// `Σ c_t Θ(x_t; s_t) + Σ κ_k θ_k = π · (2I)` with `2I ≡ parity (mod 2)`.
#[derive(Debug, Clone)]
struct Equation {
    terms: Vec<Term>,
    kappa: Vec<i64>,
    parity: i64,
    /// Branch period of the bare term, if any.
    period: Option<i64>,
}

/// Logarithmic Bethe equations for the finite roots of a sector, with
/// `Θ(x; s) = 2 atan(x / (sη))`. Roots held at infinity drop out of every
/// equation; their `Θ = −π` only shifts the branch numbers, so each
/// equation's parity is the sum of its remaining coefficients.
#[derive(Debug, Clone)]
struct System {
    eta: C64,
    num_sites: usize,
    /// Full root count per level, infinite ones included.
    counts: Vec<usize>,
    /// Roots at infinity per level.
    infinite: Vec<usize>,
    /// Finite unknowns per level.
    levels: Vec<usize>,
    /// Phase coefficients shared by all equations of a level.
    kappa: Vec<Vec<i64>>,
    equations: Vec<Equation>,
    /// XXX only: the exact pair `{±iη/2}` sits among the finite roots, and
    /// the unknowns are the remaining ones.
    singular: bool,
}

fn parity(coefs: i64) -> i64 {
    coefs.rem_euclid(2)
}

fn equation(terms: Vec<Term>, kappa: &[i64], period: Option<i64>) -> Equation {
    let coefs = terms.iter().map(|t| t.coef).sum();
    Equation { terms, kappa: kappa.to_vec(), parity: parity(coefs), period }
}

impl System {
    fn xxx(num_sites: usize, eta: C64, m: usize, infinite: usize, singular: bool) -> System {
        let f = m - infinite - if singular { 2 } else { 0 };
        let l = num_sites as i64;
        let kappa = vec![m as i64 - 1];
        let equations = (0..f)
            .map(|a| {
                let mut terms = vec![Term { coef: l, a, b: None, s: 0.5 }];
                if singular {
                    // scattering off ±iη/2 equals E(v; 1/2) E(v; 3/2)
                    terms.push(Term { coef: -1, a, b: None, s: 0.5 });
                    terms.push(Term { coef: -1, a, b: None, s: 1.5 });
                }
                terms.extend((0..f).filter(|&b| b != a).map(|b| Term { coef: -1, a, b: Some(b), s: 1.0 }));
                equation(terms, &kappa, if singular { None } else { Some(l) })
            })
            .collect();
        System {
            eta,
            num_sites,
            counts: vec![m],
            infinite: vec![infinite],
            levels: vec![f],
            kappa: vec![kappa],
            equations,
            singular,
        }
    }

    fn tj(num_sites: usize, eta: C64, n: usize, m: usize, infinite: [usize; 2]) -> System {
        let l = num_sites as i64;
        let (ni, mi) = (n as i64, m as i64);
        let (nf, mf) = (n - infinite[0], m - infinite[1]);
        let charge_kappa = vec![0, ni - mi - 1, mi];
        let spin_kappa = vec![-(mi - 1), ni - mi - 1, -(ni - 2 * mi)];
        let mut equations = Vec::with_capacity(nf + mf);
        for i in 0..nf {
            let mut terms = vec![Term { coef: l, a: i, b: None, s: 0.5 }];
            terms.extend((0..nf).filter(|&k| k != i).map(|k| Term { coef: -1, a: i, b: Some(k), s: 1.0 }));
            terms.extend((0..mf).map(|k| Term { coef: 1, a: i, b: Some(nf + k), s: 0.5 }));
            equations.push(equation(terms, &charge_kappa, None));
        }
        for j in 0..mf {
            let a = nf + j;
            let mut terms: Vec<Term> = (0..nf).map(|i| Term { coef: -1, a, b: Some(i), s: 0.5 }).collect();
            terms.extend((0..mf).filter(|&k| k != j).map(|k| Term { coef: 1, a, b: Some(nf + k), s: 1.0 }));
            equations.push(equation(terms, &spin_kappa, None));
        }
        System {
            eta,
            num_sites,
            counts: vec![n, m],
            infinite: infinite.to_vec(),
            levels: vec![nf, mf],
            kappa: vec![charge_kappa, spin_kappa],
            equations,
            singular: false,
        }
    }

    /// Same sector with a different set of roots at infinity.
    fn with_infinite(&self, infinite: &[usize]) -> System {
        match self.counts.as_slice() {
            [m] => System::xxx(self.num_sites, self.eta, *m, infinite[0], self.singular),
            [n, m] => System::tj(self.num_sites, self.eta, *n, *m, [infinite[0], infinite[1]]),
            _ => unreachable!("one or two levels"),
        }
    }

    /// Same sector with the singular pair among its finite roots.
    fn with_singular_pair(&self) -> Option<System> {
        match self.counts.as_slice() {
            [m] if !self.singular && m - self.infinite[0] >= 2 => {
                Some(System::xxx(self.num_sites, self.eta, *m, self.infinite[0], true))
            }
            _ => None,
        }
    }

    /// Total phase `Σ κ θ` of the equations of level `k`.
    fn level_phase(&self, k: usize, angles: &[f64]) -> f64 {
        self.kappa[k].iter().zip(angles).map(|(&c, &t)| c as f64 * t).sum()
    }

    /// A root of level `k` may sit at infinity only when its own equation
    /// reduces to `e^{iφ} = 1`.
    fn twist_trivial(&self, k: usize, angles: &[f64]) -> bool {
        (C64::from_polar(1.0, self.level_phase(k, angles)) - ONE).norm() < TWIST_TOL
    }

    /// Admissible numbers of roots at infinity per level.
    fn infinite_configurations(&self, angles: &[f64]) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for k in 0..self.counts.len() {
            let options: Vec<usize> =
                if self.twist_trivial(k, angles) { (0..=self.counts[k]).collect() } else { vec![0] };
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    options.iter().map(move |&o| prefix.iter().copied().chain([o]).collect::<Vec<usize>>())
                })
                .collect();
        }
        out
    }

    /// Whether the root set describes a state of the symmetry multiplet left
    /// intact by the twist. The finite roots must be a highest weight with
    /// Dynkin labels `(a, b)`, and the roots at infinity count lowering steps
    /// `(k1, k2)`, which must stay inside the weight diagram. Sets failing
    /// this solve the equations without being eigenstates.
    fn outside_multiplet(&self, angles: &[f64]) -> bool {
        let l = self.num_sites as i64;
        let mut f: Vec<i64> = self.levels.iter().map(|&n| n as i64).collect();
        if self.singular {
            f[0] += 2;
        }
        let k: Vec<i64> = self.infinite.iter().map(|&n| n as i64).collect();
        match f.as_slice() {
            [m] => self.twist_trivial(0, angles) && (l - 2 * m < k[0]),
            [n, m] => {
                let (a, b) = (l - 2 * n + m, n - 2 * m);
                match (self.twist_trivial(0, angles), self.twist_trivial(1, angles)) {
                    (true, true) => a < 0 || b < 0 || k[0] - k[1] > a || k[1] - k[0] > b || k[0].max(k[1]) > a + b,
                    (true, false) => a < k[0],
                    (false, true) => b < k[1],
                    (false, false) => false,
                }
            }
            _ => false,
        }
    }

    /// Starting value for a root of equation `e` entering from infinity:
    /// `Θ(x; s) ≈ ±π − 2sη/x` turns the equation into `Σ c s · 2η / z ≈ φ`.
    fn asymptotic_root(&self, e: usize, phase: f64) -> C64 {
        let weight: f64 = self.equations[e].terms.iter().map(|t| t.coef as f64 * t.s).sum();
        2.0 * weight * self.eta / phase
    }

    fn num_vars(&self) -> usize {
        self.levels.iter().sum()
    }

    fn level_of(&self, var: usize) -> usize {
        let mut acc = 0;
        for (k, &n) in self.levels.iter().enumerate() {
            acc += n;
            if var < acc {
                return k;
            }
        }
        self.levels.len() - 1
    }

    fn phi(eq: &Equation, angles: &[f64]) -> f64 {
        eq.kappa.iter().zip(angles).map(|(&k, &t)| k as f64 * t).sum()
    }

    fn arg(&self, t: &Term, z: &[C64]) -> C64 {
        let x = z[t.a] - t.b.map_or(C64::new(0.0, 0.0), |b| z[b]);
        x / (t.s * self.eta)
    }

    /// Log-form residuals and Jacobian; `None` on a branch point.
    fn log_form(&self, z: &[C64], angles: &[f64], doubled: &[i64]) -> Option<(Vec<C64>, Matrix)> {
        let n = self.num_vars();
        let mut f = vec![C64::new(0.0, 0.0); n];
        let mut jac = Matrix::zeros(n, n);
        for (e, eq) in self.equations.iter().enumerate() {
            let mut acc = C64::new(Self::phi(eq, angles) - PI * doubled[e] as f64, 0.0);
            for t in &eq.terms {
                let y = self.arg(t, z);
                let den = ONE + y * y;
                if den.norm() < 1e-14 {
                    return None;
                }
                acc += 2.0 * t.coef as f64 * y.atan();
                let d = 2.0 * t.coef as f64 / (den * t.s * self.eta);
                jac[(e, t.a)] += d;
                if let Some(b) = t.b {
                    jac[(e, b)] -= d;
                }
            }
            f[e] = acc;
        }
        Some((f, jac))
    }

    /// Ratio form `Π E(x_t)^{c_t} e^{iφ} (−1)^parity − 1` with
    /// `E(x; s) = e^{iΘ(x; s)} = (sη + ix)/(sη − ix)`; free of branch choices.
    fn ratio_form(&self, z: &[C64], angles: &[f64]) -> Option<(Vec<C64>, Matrix)> {
        let n = self.num_vars();
        let mut f = vec![C64::new(0.0, 0.0); n];
        let mut jac = Matrix::zeros(n, n);
        for (e, eq) in self.equations.iter().enumerate() {
            let sign = if eq.parity == 0 { 1.0 } else { -1.0 };
            let mut prod = C64::from_polar(sign, Self::phi(eq, angles));
            for t in &eq.terms {
                let y = self.arg(t, z);
                let (num, den) = (ONE + I * y, ONE - I * y);
                if num.norm() < 1e-14 || den.norm() < 1e-14 {
                    return None;
                }
                prod *= (num / den).powi(t.coef as i32);
            }
            for t in &eq.terms {
                let y = self.arg(t, z);
                let d = prod * I * 2.0 * t.coef as f64 / ((ONE + y * y) * t.s * self.eta);
                jac[(e, t.a)] += d;
                if let Some(b) = t.b {
                    jac[(e, b)] -= d;
                }
            }
            f[e] = prod - ONE;
        }
        Some((f, jac))
    }

    /// Cross-multiplied form `e^{iφ} (−1)^parity Π a_t − Π b_t`, with `a_t`,
    /// `b_t` the numerator and denominator powers of `E(x_t)^{c_t}`. Free of
    /// poles, so Newton can approach roots near the singular points, such as
    /// string solutions.
    fn poly_form(&self, z: &[C64], angles: &[f64]) -> Option<(Vec<C64>, Matrix)> {
        let n = self.num_vars();
        let mut f = vec![C64::new(0.0, 0.0); n];
        let mut jac = Matrix::zeros(n, n);
        for (e, eq) in self.equations.iter().enumerate() {
            let sign = if eq.parity == 0 { 1.0 } else { -1.0 };
            let mut a = C64::from_polar(sign, Self::phi(eq, angles));
            let mut b = ONE;
            // factors (value, power, d value / d x)
            let mut fa = Vec::with_capacity(eq.terms.len());
            let mut fb = Vec::with_capacity(eq.terms.len());
            for t in &eq.terms {
                let x = z[t.a] - t.b.map_or(C64::new(0.0, 0.0), |b| z[b]);
                let (plus, minus) = (t.s * self.eta + I * x, t.s * self.eta - I * x);
                let p = t.coef.unsigned_abs() as i32;
                let (num, dnum, den, dden) = if t.coef > 0 { (plus, I, minus, -I) } else { (minus, -I, plus, I) };
                a *= num.powi(p);
                b *= den.powi(p);
                fa.push((num, p, dnum, t));
                fb.push((den, p, dden, t));
            }
            for (factors, total, sgn) in [(&fa, a, 1.0), (&fb, b, -1.0)] {
                for &(v, p, dv, t) in factors.iter() {
                    if v.norm() < 1e-300 {
                        return None;
                    }
                    let d = total * p as f64 * dv / v * sgn;
                    jac[(e, t.a)] += d;
                    if let Some(bb) = t.b {
                        jac[(e, bb)] -= d;
                    }
                }
            }
            f[e] = a - b;
        }
        Some((f, jac))
    }

    /// Starting point from the quantum numbers, neglecting same-level scattering.
    fn initial_guess(&self, angles: &[f64], doubled: &[i64]) -> Vec<C64> {
        let mut z = vec![C64::new(0.0, 0.0); self.num_vars()];
        for (e, eq) in self.equations.iter().enumerate() {
            let own = self.level_of(e);
            let anchors: Vec<&Term> =
                eq.terms.iter().filter(|t| t.b.is_none_or(|b| self.level_of(b) != own)).collect();
            let c: i64 = anchors.iter().map(|t| t.coef).sum();
            if c == 0 {
                continue;
            }
            let centre = anchors.iter().filter_map(|t| t.b).map(|b| z[b]).sum::<C64>()
                / anchors.iter().filter(|t| t.b.is_some()).count().max(1) as f64;
            let s = anchors[0].s;
            let angle = (PI * doubled[e] as f64 - Self::phi(eq, angles)) / (2.0 * c as f64);
            z[e] = centre + s * self.eta * angle.tan();
        }
        z
    }

    /// Candidate branch numbers: strictly increasing within each level, inside
    /// the window reached by real roots, widened by `margin`.
    fn quantum_windows(&self, angles: &[f64], margin: f64) -> Vec<Vec<i64>> {
        let mut per_level: Vec<Vec<Vec<i64>>> = Vec::new();
        let mut start = 0;
        for &size in &self.levels {
            if size == 0 {
                per_level.push(vec![vec![]]);
                continue;
            }
            let eq = &self.equations[start];
            // |Σ c Θ| / π approached as the root runs off to infinity
            let reach = eq.terms.iter().map(|t| t.coef).sum::<i64>().abs();
            let centre = Self::phi(eq, angles) / PI;
            let half = reach as f64 + 2.0 * margin;
            let lo = (centre - half).floor() as i64 - 1;
            let hi = (centre + half).ceil() as i64 + 1;
            let allowed: Vec<i64> = (lo..=hi)
                .filter(|d| d.rem_euclid(2) == eq.parity)
                .filter(|&d| {
                    let off = (d as f64 - centre).abs();
                    if margin == 0.0 {
                        off < half - 1e-9
                    } else {
                        off <= half + 1e-9
                    }
                })
                .collect();
            per_level.push(increasing_tuples(&allowed, size));
            start += size;
        }
        let mut out = vec![vec![]];
        for options in per_level {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    options.iter().map(move |o| prefix.iter().chain(o).copied().collect::<Vec<i64>>())
                })
                .collect();
        }
        out
    }
}

fn increasing_tuples(values: &[i64], k: usize) -> Vec<Vec<i64>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        for mut rest in increasing_tuples(&values[i + 1..], k - 1) {
            rest.insert(0, v);
            out.push(rest);
        }
    }
    out
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton iteration; the step is halved until the residual decreases.
fn newton<F>(f: F, mut z: Vec<C64>, tol: f64, max_iter: usize) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Option<(Vec<C64>, Matrix)>,
{
    let n = z.len();
    let Some((mut fz, mut jac)) = f(&z) else {
        return Err(Error::NoConvergence { iterations: 0, residual: f64::INFINITY });
    };
    let mut res = max_norm(&fz);
    for it in 0..max_iter {
        if !res.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        if res < tol {
            return Ok(z);
        }
        let rhs = DVector::from_vec(fz.clone());
        let Some(step) = jac.clone().lu().solve(&rhs) else {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<C64> = (0..n).map(|k| z[k] - step[k] * t).collect();
            if let Some((ft, jt)) = f(&trial) {
                let rt = max_norm(&ft);
                if rt.is_finite() && rt < res {
                    z = trial;
                    fz = ft;
                    jac = jt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
    }
    if res < tol {
        Ok(z)
    } else {
        Err(Error::NoConvergence { iterations: max_iter, residual: res })
    }
}

struct Problem {
    model: ModelSpec,
    sector: Sector,
    angles: Vec<f64>,
}

impl Problem {
    fn new(model: &ModelSpec, sector: Sector) -> Result<Problem> {
        let l = model.num_sites;
        let angles = match (model.stats, sector.m) {
            (Statistics::Xxx { q }, None) if sector.n <= l => vec![q.arg()],
            (Statistics::Tj { q1, q2, q3 }, Some(m)) if m <= sector.n && sector.n <= l => {
                vec![q1.arg(), q2.arg(), q3.arg()]
            }
            _ => return Err(Error::InvalidConfig(format!("sector {sector} is not valid for this model"))),
        };
        // q within rounding of 1 is the reference point itself
        let angles = angles.into_iter().map(|a| if a.abs() < TWIST_TOL { 0.0 } else { a }).collect();
        Ok(Problem { model: model.clone(), sector, angles })
    }

    /// Systems to solve: one per admissible placement of roots at infinity
    /// and of the XXX singular pair, leaving out those that do not describe a
    /// multiplet state.
    fn systems(&self) -> Vec<System> {
        let eta = self.model.eta;
        let l = self.model.num_sites;
        let base = match self.sector.m {
            None => System::xxx(l, eta, self.sector.n, 0, false),
            Some(m) => System::tj(l, eta, self.sector.n, m, [0, 0]),
        };
        let mut out = Vec::new();
        for inf in base.infinite_configurations(&self.angles) {
            let sys = base.with_infinite(&inf);
            // the singular pair is an eigenstate only without twist
            if sys.twist_trivial(0, &self.angles) {
                out.extend(sys.with_singular_pair());
            }
            out.push(sys);
        }
        out.retain(|sys| !sys.outside_multiplet(&self.angles));
        out
    }

    fn at_angles(&self, angles: &[f64]) -> Result<ModelSpec> {
        use crate::linalg::phase;
        let stats = match self.model.stats {
            Statistics::Xxx { .. } => Statistics::Xxx { q: phase(angles[0]) },
            Statistics::Tj { .. } => Statistics::Tj { q1: phase(angles[0]), q2: phase(angles[1]), q3: phase(angles[2]) },
        };
        self.model.with_stats(stats)
    }

    /// Wraps a solution vector into roots and applies the admissibility filter.
    fn accept(&self, sys: &System, z: &[C64], model: &ModelSpec, opts: &SolverOptions) -> Option<BetheSolution> {
        if z.iter().any(|v| !v.is_finite() || v.norm() > ROOT_INFINITY) {
            return None;
        }
        let mut levels: Vec<Vec<Rapidity>> = Vec::new();
        let mut start = 0;
        for (k, &n) in sys.levels.iter().enumerate() {
            let mut level: Vec<Rapidity> = z[start..start + n].iter().map(|&v| Rapidity::Finite(v)).collect();
            if sys.singular && k == 0 {
                level.extend([Rapidity::Finite(I * model.eta / 2.0), Rapidity::Finite(-I * model.eta / 2.0)]);
            }
            level.extend(std::iter::repeat_n(Rapidity::Infinite, sys.infinite[k]));
            levels.push(level);
            start += n;
        }
        let eta = model.eta;
        for level in &levels {
            let vals: Vec<C64> = level.iter().filter_map(Rapidity::finite).collect();
            for a in 0..vals.len() {
                for b in 0..a {
                    if (vals[a] - vals[b]).norm() < ADMISSIBLE_GAP {
                        return None;
                    }
                }
            }
        }
        let bare_poles = |vals: &[Rapidity]| {
            vals.iter()
                .filter_map(Rapidity::finite)
                .any(|v| (v - I * eta / 2.0).norm() < ADMISSIBLE_GAP || (v + I * eta / 2.0).norm() < ADMISSIBLE_GAP)
        };
        let pair = if sys.singular { 2 } else { 0 };
        let unknown = &levels[0][..levels[0].len() - pair - sys.infinite[0]];
        if bare_poles(unknown) {
            return None;
        }
        if sys.singular
            && unknown.iter().filter_map(Rapidity::finite).any(|v| {
                (v - 1.5 * I * eta).norm() < ADMISSIBLE_GAP || (v + 1.5 * I * eta).norm() < ADMISSIBLE_GAP
            })
        {
            return None;
        }
        if levels.len() == 2 {
            for u in levels[0].iter().filter_map(Rapidity::finite) {
                for v in levels[1].iter().filter_map(Rapidity::finite) {
                    let x = u - v;
                    if (x - I * eta / 2.0).norm() < ADMISSIBLE_GAP || (x + I * eta / 2.0).norm() < ADMISSIBLE_GAP {
                        return None;
                    }
                }
            }
        }
        let mut roots = match model.stats {
            Statistics::Xxx { .. } => BetheRoots::Xxx(BetheRootsXxx::new(model, levels.remove(0)).ok()?),
            Statistics::Tj { .. } => {
                let charge = levels.remove(0);
                BetheRoots::Tj(BetheRootsTj::new(model, charge, levels.remove(0)).ok()?)
            }
        };
        let residual = roots.relative_residual().ok()?;
        if residual >= opts.accept_tol || roots.energy().is_err() {
            return None;
        }
        roots.canonicalize();
        Some(BetheSolution { roots, quantum_numbers: None, residual })
    }

    fn split_numbers(&self, sys: &System, doubled: &[i64]) -> QuantumNumbers {
        let n0 = sys.levels[0];
        QuantumNumbers::new(doubled[..n0].to_vec(), doubled[n0..].to_vec())
    }
}

/// Reduces periodic branch numbers into the principal window.
fn reduce(sys: &System, angles: &[f64], doubled: &[i64]) -> Vec<i64> {
    sys.equations
        .iter()
        .zip(doubled)
        .map(|(eq, &d)| match eq.period {
            Some(p) => {
                let centre = System::phi(eq, angles) / PI;
                d - 2 * p * ((d as f64 - centre) / (2 * p) as f64).round() as i64
            }
            None => d,
        })
        .collect()
}

/// Solves the logarithmic equations for one set of branch numbers.
pub fn solve_log_newton(
    model: &ModelSpec,
    sector: Sector,
    numbers: &QuantumNumbers,
    opts: &SolverOptions,
) -> Result<BetheSolution> {
    let p = Problem::new(model, sector)?;
    let sys = match sector.m {
        None => System::xxx(model.num_sites, model.eta, sector.n, 0, false),
        Some(m) => System::tj(model.num_sites, model.eta, sector.n, m, [0, 0]),
    };
    let doubled = numbers.all();
    if doubled.len() != sys.num_vars() {
        return Err(Error::InvalidConfig(format!(
            "{} quantum numbers for {} unknowns",
            doubled.len(),
            sys.num_vars()
        )));
    }
    log_newton_one(&p, &sys, &doubled, opts)
}

fn log_newton_one(p: &Problem, sys: &System, doubled: &[i64], opts: &SolverOptions) -> Result<BetheSolution> {
    let doubled = reduce(sys, &p.angles, doubled);
    let z0 = sys.initial_guess(&p.angles, &doubled);
    let z = newton(|z| sys.log_form(z, &p.angles, &doubled), z0, opts.tol, opts.max_iter)?;
    let mut s = p
        .accept(sys, &z, &p.model, opts)
        .ok_or_else(|| Error::ConvergenceFailure("converged to an inadmissible root set".into()))?;
    s.quantum_numbers = Some(p.split_numbers(sys, &doubled));
    Ok(s)
}

fn run_log_newton(p: &Problem, opts: &SolverOptions, report: &mut SolveReport) {
    for sys in p.systems() {
        let margin = if sys.levels.len() > 1 { 1.0 } else { 0.0 };
        let windows = sys.quantum_windows(&p.angles, margin);
        let found: Vec<Option<BetheSolution>> =
            windows.par_iter().map(|d| log_newton_one(p, &sys, d, opts).ok()).collect();
        report.record(found);
    }
}

fn seed_point(n: usize, eta: C64, seed: u64, index: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let scale = eta.norm();
    (0..n)
        .map(|_| C64::new(rng.random_range(-2.0..2.0) * scale, rng.random_range(-1.0..1.0) * scale))
        .collect()
}

fn run_multistart(p: &Problem, opts: &SolverOptions, report: &mut SolveReport) {
    for (k, sys) in p.systems().iter().enumerate() {
        let n = sys.num_vars();
        let found: Vec<Option<BetheSolution>> = (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let z0 = seed_point(n, p.model.eta, opts.seed.wrapping_add(k as u64), i);
                let z = newton(|z| sys.ratio_form(z, &p.angles), z0.clone(), opts.tol * 1e-1, opts.max_iter)
                    .ok()
                    .and_then(|z| p.accept(sys, &z, &p.model, opts));
                z.or_else(|| {
                    let z = newton(|z| sys.poly_form(z, &p.angles), z0, opts.tol * 1e-3, opts.max_iter).ok()?;
                    p.accept(sys, &z, &p.model, opts)
                })
            })
            .collect();
        report.record(found);
    }
}

/// Continues one root set from angle fraction `t_start` to 1.
fn continue_path(p: &Problem, sys: &System, start: &[C64], t_start: f64, opts: &SolverOptions) -> Result<Vec<C64>> {
    let target = p.angles.clone();
    let at = |t: f64| target.iter().map(|a| a * t).collect::<Vec<f64>>();
    let mut t = t_start;
    let mut dt = 1.0 / opts.homotopy_steps.max(1) as f64;
    let mut z = start.to_vec();
    let mut prev: Option<(f64, Vec<C64>)> = None;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        // linear predictor from the last two accepted points
        let guess: Vec<C64> = match &prev {
            Some((tp, zp)) => z.iter().zip(zp).map(|(a, b)| a + (a - b) * ((next - t) / (t - tp))).collect(),
            None => z.clone(),
        };
        let angles = at(next);
        match newton(|y| sys.ratio_form(y, &angles), guess, opts.tol * 1e-1, 30) {
            Ok(y) if y.iter().all(|v| v.norm() < ROOT_INFINITY) => {
                check_separation(sys, &y)?;
                prev = Some((t, std::mem::replace(&mut z, y)));
                t = next;
                dt = (dt * 1.5).min(0.25);
            }
            _ => {
                dt *= 0.5;
                if dt < 1e-6 {
                    return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
                }
            }
        }
    }
    Ok(z)
}

fn check_separation(sys: &System, z: &[C64]) -> Result<()> {
    let mut start = 0;
    for &n in &sys.levels {
        for a in start..start + n {
            for b in start..a {
                if (z[a] - z[b]).norm() < super::roots::MIN_SEPARATION {
                    return Err(Error::DegenerateRoots { first: b, second: a });
                }
            }
        }
        start += n;
    }
    Ok(())
}

fn finite_values(s: &BetheSolution) -> Vec<C64> {
    s.roots.levels().iter().flat_map(|l| l.iter().filter_map(Rapidity::finite)).collect()
}

/// Angle fraction at which a root entering from infinity is placed on the
/// path, and its position there.
const ENTRY_RADIUS: f64 = 20.0;

/// Follows a solution at zero twist to the target angles. Roots at infinity
/// whose level stays untwisted remain there; the others enter from infinity
/// at the fraction where their asymptotic position has modulus
/// `ENTRY_RADIUS |η|`.
fn follow(p: &Problem, s: &BetheSolution, opts: &SolverOptions) -> std::result::Result<BetheSolution, String> {
    let eta = p.model.eta;
    if let BetheRoots::Xxx(r) = &s.roots {
        if r.singular_pair().is_some() {
            return Err("the singular pair exists only without twist".into());
        }
    }
    let (counts, infinite): (Vec<usize>, Vec<usize>) = s
        .roots
        .levels()
        .iter()
        .map(|l| (l.len(), l.iter().filter(|r| r.is_infinite()).count()))
        .unzip();
    let base = match counts.as_slice() {
        [m] => System::xxx(p.model.num_sites, eta, *m, 0, false),
        [n, m] => System::tj(p.model.num_sites, eta, *n, *m, [0, 0]),
        _ => unreachable!("one or two levels"),
    };
    let kept: Vec<usize> = infinite
        .iter()
        .enumerate()
        .map(|(k, &i)| if i > 0 && base.twist_trivial(k, &p.angles) { i } else { 0 })
        .collect();
    let sys = base.with_infinite(&kept);
    if sys.outside_multiplet(&p.angles) {
        return Err("endpoint outside the symmetry multiplet".into());
    }
    let mut z = Vec::with_capacity(sys.num_vars());
    let mut t0: f64 = 0.0;
    let mut entering = Vec::new();
    for (k, level) in s.roots.levels().iter().enumerate() {
        z.extend(level.iter().filter_map(Rapidity::finite));
        for _ in kept[k]..infinite[k] {
            entering.push(z.len());
            z.push(C64::new(0.0, 0.0));
        }
    }
    for &e in &entering {
        let k = sys.level_of(e);
        let phase = sys.level_phase(k, &p.angles);
        if phase.abs() < 1e-12 {
            return Err("root at infinity has no asymptotic entry".into());
        }
        let weight: f64 = sys.equations[e].terms.iter().map(|t| t.coef as f64 * t.s).sum();
        if weight == 0.0 {
            return Err("root at infinity has no asymptotic entry".into());
        }
        t0 = t0.max((2.0 * weight.abs() / (ENTRY_RADIUS * phase.abs())).min(0.25));
    }
    if !entering.is_empty() {
        let angles: Vec<f64> = p.angles.iter().map(|a| a * t0).collect();
        // several roots entering one level are spread along the same ray
        for (j, &e) in entering.iter().enumerate() {
            let k = sys.level_of(e);
            z[e] = sys.asymptotic_root(e, sys.level_phase(k, &angles)) * (1.0 + 0.5 * j as f64);
        }
        z = newton(|y| sys.ratio_form(y, &angles), z, opts.tol * 1e-1, opts.max_iter)
            .map_err(|e| format!("entry from infinity: {e}"))?;
    }
    let z = continue_path(p, &sys, &z, t0, opts).map_err(|e| e.to_string())?;
    p.accept(&sys, &z, &p.model, opts).ok_or_else(|| "endpoint rejected".into())
}

fn run_homotopy(p: &Problem, opts: &SolverOptions, report: &mut SolveReport) -> Result<()> {
    let zero = vec![0.0; p.angles.len()];
    let reference = Problem { model: p.at_angles(&zero)?, sector: p.sector, angles: zero };
    let mut start = SolveReport::empty(Strategy::Homotopy, p.sector);
    run_log_newton(&reference, opts, &mut start);
    run_multistart(&reference, opts, &mut start);
    if p.angles.iter().all(|&a| a == 0.0) {
        report.record(start.solutions.into_iter().map(Some).collect());
        return Ok(());
    }
    let paths: Vec<std::result::Result<BetheSolution, String>> =
        start.solutions.par_iter().map(|s| follow(p, s, opts)).collect();
    let mut found = Vec::with_capacity(paths.len());
    for (k, path) in paths.into_iter().enumerate() {
        match path {
            Ok(sol) => found.push(Some(sol)),
            Err(e) => {
                report.path_failures.push(format!("path {k}: {e}"));
                found.push(None);
            }
        }
    }
    report.record(found);
    Ok(())
}

impl SolveReport {
    /// Collects solutions in input order, dropping duplicates.
    fn record(&mut self, found: Vec<Option<BetheSolution>>) {
        self.attempts += found.len();
        for s in found {
            match s {
                None => self.failed += 1,
                Some(s) if self.solutions.iter().any(|r| r.roots.same_set(&s.roots, DEDUP_TOL)) => self.duplicates += 1,
                Some(s) => self.solutions.push(s),
            }
        }
    }

    fn empty(strategy: Strategy, sector: Sector) -> SolveReport {
        SolveReport {
            strategy,
            sector,
            solutions: Vec::new(),
            attempts: 0,
            failed: 0,
            duplicates: 0,
            path_failures: Vec::new(),
        }
    }
}

/// Solves the Bethe equations of `model` in `sector`.
///
/// Returned root sets are distinct up to permutation within each level,
/// satisfy the product-form equations to `opts.accept_tol` (relative), and
/// are ordered by energy.
pub fn solve_bae(model: &ModelSpec, sector: Sector, strategy: Strategy, opts: &SolverOptions) -> Result<SolveReport> {
    let p = Problem::new(model, sector)?;
    let mut report = SolveReport::empty(strategy, sector);
    if sector.n == 0 {
        // vacuum: no unknowns
        let sys = p.systems().remove(0);
        report.record(vec![p.accept(&sys, &[], model, opts)]);
        sort_solutions(&mut report.solutions);
        return Ok(report);
    }
    match strategy {
        Strategy::LogNewton => run_log_newton(&p, opts, &mut report),
        Strategy::Multistart => run_multistart(&p, opts, &mut report),
        Strategy::Homotopy => run_homotopy(&p, opts, &mut report)?,
    }
    sort_solutions(&mut report.solutions);
    Ok(report)
}

fn sort_solutions(sols: &mut [BetheSolution]) {
    let key = |s: &BetheSolution| {
        let e = s.roots.energy().unwrap_or(C64::new(f64::INFINITY, 0.0));
        let first = finite_values(s);
        (e, first)
    };
    sols.sort_by(|a, b| {
        let (ea, fa) = key(a);
        let (eb, fb) = key(b);
        ea.re
            .total_cmp(&eb.re)
            .then(ea.im.total_cmp(&eb.im))
            .then_with(|| {
                for (x, y) in fa.iter().zip(&fb) {
                    let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
                    if o.is_ne() {
                        return o;
                    }
                }
                fa.len().cmp(&fb.len())
            })
    });
}
