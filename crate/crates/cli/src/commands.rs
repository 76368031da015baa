use std::f64::consts::PI;
use std::time::Instant;

use anyon_qism::bethe::{
    match_spectrum, solve_bae, BetheRoots, BetheSolution, MatchOptions, MatchReport, Rapidity, SolverOptions,
    Strategy, DEDUP_TOL,
};
use anyon_qism::chain::{
    commutation_of_transfers, commutation_suite, exact_spectrum, explicit_hamiltonian, fit_affine,
    hamiltonian_from_transfer, resolve_levels, transfer_matrix, ModelSpec, Sector, Statistics,
};
use anyon_qism::error::Error;
use anyon_qism::graded::string_transparency_check;
use anyon_qism::integrability::{check_rll, check_ybe, nested_lax, nested_r_matrix, Param, ResidualReport};
use anyon_qism::linalg::{commutator, frobenius, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig, StrategyArg};
use crate::output::{complex, csv, json, num};
use crate::{CliError, Outcome};

pub const TOL_YBE: f64 = 1e-12;
pub const TOL_RLL: f64 = 1e-12;
pub const TOL_NESTED_RLL: f64 = 1e-10;
pub const TOL_TRANSPARENCY: f64 = 1e-12;
pub const TOL_COMMUTATION: f64 = 1e-13;
pub const TOL_TRANSFER: f64 = 1e-10;
pub const TOL_HAMILTONIAN: f64 = 1e-10;
pub const DEFAULT_VERIFY_SAMPLES: usize = 20;

#[derive(Serialize)]
struct Record<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

fn render<T: Serialize>(
    command: &'static str,
    cfg: &RunConfig,
    body: T,
    start: Instant,
    rows: impl FnOnce(&T) -> (Vec<&'static str>, Vec<Vec<String>>),
) -> Result<Vec<u8>, CliError> {
    match cfg.format {
        Format::Json => {
            let timing_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            json(&Record { command, config: cfg, body, timing_ms })
        }
        Format::Csv => {
            let (header, rows) = rows(&body);
            csv(&header, &rows)
        }
    }
}

fn params(p: &[Param]) -> String {
    p.iter().map(|p| format!("{}={}", p.name, complex(C64::new(p.re, p.im)))).collect::<Vec<_>>().join(";")
}

fn sample_points(cfg: &RunConfig, eta: C64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = || eta * C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    (0..cfg.samples.unwrap_or(DEFAULT_VERIFY_SAMPLES)).map(|_| (draw(), draw())).collect()
}

fn sampled<F>(name: &str, pts: &[(C64, C64)], f: F) -> Result<Check, CliError>
where
    F: Fn(C64, C64) -> anyon_qism::error::Result<ResidualReport> + Sync,
{
    let reps: Vec<ResidualReport> = pts.par_iter().map(|&(l, m)| f(l, m)).collect::<Result<_, _>>()?;
    let report = ResidualReport::worst(name, reps).expect("at least one sample");
    Ok(Check { samples: pts.len(), report })
}

#[derive(Serialize)]
pub struct Check {
    pub samples: usize,
    #[serde(flatten)]
    pub report: ResidualReport,
}

#[derive(Serialize)]
struct VerifyBody {
    checks: Vec<Check>,
    passed: bool,
}

/// Runs every identity check on the configured model.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let model = cfg.model_spec()?;
    let tol = |default: f64| cfg.tol.unwrap_or(default);
    let pts = sample_points(cfg, model.eta);
    let r = model.r_matrix();
    let lax = model.lax();
    let g = model.grading();

    let mut checks = vec![
        sampled("yang_baxter", &pts, |l, m| Ok(check_ybe(&r, l, m, tol(TOL_YBE))))?,
        sampled("string_transparency", &pts, |l, _| {
            let t = string_transparency_check(&r.evaluate(l), &g);
            let mut rep = ResidualReport::new("string_transparency", vec![Param::new("lambda", l)], t.worst, tol(TOL_TRANSPARENCY));
            if !t.transparent {
                rep.status = anyon_qism::integrability::CheckStatus::Fail;
            }
            Ok(rep)
        })?,
        sampled("rll", &pts, |l, m| check_rll(&r, &lax, l, m, tol(TOL_RLL)))?,
    ];
    if let Statistics::Tj { q1, q2, q3 } = model.stats {
        let nr = nested_r_matrix(model.eta, q1, q2, q3)?;
        let nl = nested_lax(model.eta, q1, q2, q3)?;
        checks.push(sampled("rll_nested", &pts, |l, m| check_rll(&nr, &nl, l, m, tol(TOL_NESTED_RLL)))?);
    }
    checks.push(Check { samples: 1, report: commutation_suite(&model, tol(TOL_COMMUTATION))? });
    checks.push(sampled("transfer_commutation", &pts, |l, m| commutation_of_transfers(&model, l, m, tol(TOL_TRANSFER)))?);

    let h = explicit_hamiltonian(&model)?;
    let ext = hamiltonian_from_transfer(&model)?;
    let fit = fit_affine(&ext.hamiltonian.matrix, &h.matrix);
    let mut rep = ResidualReport::new("hamiltonian_affine_fit", vec![], fit.residual, tol(TOL_HAMILTONIAN));
    rep.diagnostics = vec![
        ("alpha_re".into(), fit.alpha.re),
        ("alpha_im".into(), fit.alpha.im),
        ("beta_re".into(), fit.beta.re),
        ("beta_im".into(), fit.beta.im),
        ("shift_condition".into(), ext.shift_condition),
    ];
    checks.push(Check { samples: 1, report: rep });
    checks.push(sampled("hamiltonian_transfer_commutation", &pts, |_, m| {
        let t = transfer_matrix(&model, m)?.matrix;
        let rel = frobenius(&commutator(&h.matrix, &t)) / (frobenius(&h.matrix) * frobenius(&t));
        Ok(ResidualReport::new("hamiltonian_transfer_commutation", vec![Param::new("mu", m)], rel, tol(TOL_HAMILTONIAN)))
    })?);

    let passed = checks.iter().all(|c| c.report.passed());
    let body = render("verify", cfg, VerifyBody { checks, passed }, start, |b| {
        let rows = b
            .checks
            .iter()
            .map(|c| {
                let r = &c.report;
                vec![
                    r.identity.clone(),
                    serde_json::to_value(r.status).unwrap().as_str().unwrap_or_default().to_string(),
                    num(r.max_residual),
                    num(r.tolerance),
                    c.samples.to_string(),
                    params(&r.parameters),
                ]
            })
            .collect();
        (vec!["check", "status", "max_residual", "tolerance", "samples", "worst_parameters"], rows)
    })?;
    Ok(Outcome { body, ok: passed })
}

#[derive(Serialize)]
struct SectorSpectrum {
    #[serde(serialize_with = "sector_string")]
    sector: Sector,
    dim: usize,
    hermitian: bool,
    energies: Vec<C64>,
    /// τ eigenvalues paired with `energies` (joint eigenvectors).
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<C64>>,
}

#[derive(Serialize)]
struct SpectrumBody {
    total_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<C64>,
    sectors: Vec<SectorSpectrum>,
}

fn sector_string<S: serde::Serializer>(s: &Sector, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(s)
}

/// Sector-resolved eigenvalues of `H` (XXX) or `ηH` (t–J), optionally with
/// the transfer-matrix eigenvalue of each joint eigenvector.
pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let model = cfg.model_spec()?;
    let h = explicit_hamiltonian(&model)?;
    let lambda = cfg.lambda.map(|[re, im]| C64::new(re, im));
    let tau = lambda.map(|l| transfer_matrix(&model, l)).transpose()?;
    let sectors = cfg
        .sector_list(&model)
        .par_iter()
        .map(|&s| -> Result<SectorSpectrum, CliError> {
            let sp = exact_spectrum(&h, Some(s))?;
            let Some(tau) = &tau else {
                return Ok(SectorSpectrum { sector: s, dim: sp.dim, hermitian: sp.hermitian, energies: sp.eigenvalues, tau: None });
            };
            if !sp.hermitian {
                return Err(CliError::Config("τ eigenvalues are paired only for a Hermitian Hamiltonian".into()));
            }
            let mut energies = Vec::with_capacity(sp.dim);
            let mut taus = Vec::with_capacity(sp.dim);
            for level in resolve_levels(&h, &[tau], Some(s), 1e-8)? {
                let mut t = level.block_eigenvalues(0)?;
                anyon_qism::linalg::sort_complex(&mut t);
                energies.extend(std::iter::repeat_n(C64::new(level.energy, 0.0), t.len()));
                taus.extend(t);
            }
            Ok(SectorSpectrum { sector: s, dim: sp.dim, hermitian: true, energies, tau: Some(taus) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total_dim = sectors.iter().map(|s| s.dim).sum();
    let body = SpectrumBody { total_dim, lambda, sectors };
    let out = render("spectrum", cfg, body, start, |b| {
        let mut header = vec!["sector", "index", "energy", "energy_im"];
        if b.lambda.is_some() {
            header.extend(["tau_re", "tau_im"]);
        }
        let mut rows = Vec::new();
        for s in &b.sectors {
            for (i, e) in s.energies.iter().enumerate() {
                let mut row = vec![s.sector.to_string(), i.to_string(), num(e.re), num(e.im)];
                if let Some(t) = &s.tau {
                    row.extend([num(t[i].re), num(t[i].im)]);
                }
                rows.push(row);
            }
        }
        (header, rows)
    })?;
    Ok(Outcome { body: out, ok: true })
}

#[derive(Serialize)]
struct StrategySummary {
    strategy: Strategy,
    attempts: usize,
    failed: usize,
    duplicates: usize,
    found: usize,
    path_failures: Vec<String>,
}

#[derive(Serialize)]
struct SectorBethe {
    #[serde(serialize_with = "sector_string")]
    sector: Sector,
    strategies: Vec<StrategySummary>,
    solutions: Vec<BetheSolution>,
    /// Absent when the exact spectrum exceeds the dimension cap.
    #[serde(rename = "match")]
    matching: Option<MatchReport>,
}

fn solve_sector(
    model: &ModelSpec,
    sector: Sector,
    strategy: StrategyArg,
    opts: &SolverOptions,
    mopts: &MatchOptions,
) -> Result<SectorBethe, CliError> {
    let mut strategies = Vec::new();
    let mut solutions: Vec<BetheSolution> = Vec::new();
    for s in strategy.strategies() {
        let rep = solve_bae(model, sector, s, opts)?;
        strategies.push(StrategySummary {
            strategy: s,
            attempts: rep.attempts,
            failed: rep.failed,
            duplicates: rep.duplicates,
            found: rep.solutions.len(),
            path_failures: rep.path_failures,
        });
        for sol in rep.solutions {
            if !solutions.iter().any(|u| u.roots.same_set(&sol.roots, DEDUP_TOL)) {
                solutions.push(sol);
            }
        }
    }
    let roots: Vec<BetheRoots> = solutions.iter().map(|s| s.roots.clone()).collect();
    let matching = match match_spectrum(model, sector, &roots, mopts) {
        Ok(m) => Some(m),
        Err(Error::ResourceLimit { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(SectorBethe { sector, strategies, solutions, matching })
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    let mut o = SolverOptions { seed: cfg.seed, ..Default::default() };
    if let Some(n) = cfg.samples {
        o.samples = n;
    }
    o
}

fn match_options(cfg: &RunConfig, model: &ModelSpec) -> MatchOptions {
    let mut m = MatchOptions::new(model.eta);
    if let Some(t) = cfg.tol {
        m.tol = t;
    }
    m
}

fn sector_ok(s: &SectorBethe) -> bool {
    s.matching.as_ref().is_none_or(MatchReport::all_matched)
}

fn roots_string(r: &BetheRoots) -> String {
    r.levels()
        .iter()
        .map(|lv| {
            lv.iter()
                .map(|x| match x {
                    Rapidity::Infinite => "inf".to_string(),
                    Rapidity::Finite(z) => complex(*z),
                })
                .collect::<Vec<_>>()
                .join(";")
        })
        .collect::<Vec<_>>()
        .join("|")
}

#[derive(Serialize)]
struct BetheBody {
    sectors: Vec<SectorBethe>,
    all_matched: bool,
}

/// Solves the Bethe equations sector by sector and matches every root set
/// against the exact spectrum when it fits under the dimension cap.
pub fn bethe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let model = cfg.model_spec()?;
    let opts = solver_options(cfg);
    let mopts = match_options(cfg, &model);
    let strategy = cfg.strategy.unwrap_or(StrategyArg::LogNewton);
    let sectors = cfg
        .sector_list(&model)
        .iter()
        .map(|&s| solve_sector(&model, s, strategy, &opts, &mopts))
        .collect::<Result<Vec<_>, _>>()?;
    let all_matched = sectors.iter().all(sector_ok);
    let body = render("bethe", cfg, BetheBody { sectors, all_matched }, start, |b| {
        let mut rows = Vec::new();
        for s in &b.sectors {
            for (i, sol) in s.solutions.iter().enumerate() {
                let e = sol.roots.energy().ok();
                let m = s.matching.as_ref().map(|m| &m.entries[i]);
                rows.push(vec![
                    s.sector.to_string(),
                    roots_string(&sol.roots),
                    e.map(|e| num(e.re)).unwrap_or_default(),
                    e.map(|e| num(e.im)).unwrap_or_default(),
                    m.and_then(|m| m.level).map(|l| l.to_string()).unwrap_or_default(),
                    num(sol.residual),
                    m.map(|m| num(m.energy_residual.max(m.lambda_residual))).unwrap_or_default(),
                    m.map(|m| m.matched.to_string()).unwrap_or_default(),
                ]);
            }
        }
        (vec!["sector", "roots", "energy", "energy_im", "level", "bae_residual", "match_residual", "matched"], rows)
    })?;
    Ok(Outcome { body, ok: all_matched })
}

#[derive(Serialize)]
struct BetheSummary {
    found: usize,
    matched: usize,
    completeness_deficit: Option<usize>,
    path_failures: Vec<String>,
    /// Energies of matched root sets, for the level columns.
    matched_energies: Vec<C64>,
    all_matched: bool,
}

#[derive(Serialize)]
struct SweepSector {
    #[serde(serialize_with = "sector_string")]
    sector: Sector,
    energies: Vec<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bethe: Option<BetheSummary>,
}

#[derive(Serialize)]
struct SweepPoint {
    /// Value given to every varied angle.
    angle: f64,
    theta: Vec<f64>,
    sectors: Vec<SweepSector>,
}

#[derive(Serialize)]
struct SweepBody {
    points: Vec<SweepPoint>,
    all_matched: bool,
}

fn sweep_point(cfg: &RunConfig, angle: f64) -> Result<SweepPoint, CliError> {
    let mut theta = cfg.theta.clone();
    for &k in &cfg.vary {
        theta[k - 1] = angle;
    }
    let model = cfg.model_at(&theta)?;
    let h = explicit_hamiltonian(&model)?;
    let opts = solver_options(cfg);
    let mopts = match_options(cfg, &model);
    let strategy = cfg.strategy.unwrap_or(StrategyArg::Homotopy);
    let mut sectors = Vec::new();
    for s in cfg.sector_list(&model) {
        let energies = exact_spectrum(&h, Some(s))?.eigenvalues;
        let bethe = if cfg.bethe {
            let sb = solve_sector(&model, s, strategy, &opts, &mopts)?;
            let m = sb.matching.as_ref();
            Some(BetheSummary {
                found: sb.solutions.len(),
                matched: m.map_or(0, |m| m.matched),
                completeness_deficit: m.map(|m| m.completeness_deficit),
                path_failures: sb.strategies.iter().flat_map(|x| x.path_failures.clone()).collect(),
                matched_energies: m
                    .map(|m| m.entries.iter().filter(|e| e.matched).filter_map(|e| e.energy).collect())
                    .unwrap_or_default(),
                all_matched: sector_ok(&sb),
            })
        } else {
            None
        };
        sectors.push(SweepSector { sector: s, energies, bethe });
    }
    Ok(SweepPoint { angle, theta, sectors })
}

/// Exact spectra on a uniform grid of the varied angles over `[0, 2π]`.
pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let n = cfg.grid;
    let points = (0..n)
        .into_par_iter()
        .map(|g| sweep_point(cfg, 2.0 * PI * g as f64 / (n - 1) as f64))
        .collect::<Result<Vec<_>, _>>()?;
    let all_matched =
        points.iter().flat_map(|p| &p.sectors).all(|s| s.bethe.as_ref().is_none_or(|b| b.all_matched));
    let with_bethe = cfg.bethe;
    let body = render("sweep", cfg, SweepBody { points, all_matched }, start, |b| {
        let mut header = vec!["theta", "sector", "level", "energy", "energy_im"];
        if with_bethe {
            header.push("bethe_sets");
        }
        let mut rows = Vec::new();
        for p in &b.points {
            for s in &p.sectors {
                for (i, e) in s.energies.iter().enumerate() {
                    let mut row = vec![num(p.angle), s.sector.to_string(), i.to_string(), num(e.re), num(e.im)];
                    if let Some(bs) = &s.bethe {
                        let k = bs.matched_energies.iter().filter(|x| (*x - e).norm() < 1e-7).count();
                        row.push(k.to_string());
                    }
                    rows.push(row);
                }
            }
        }
        (header, rows)
    })?;
    Ok(Outcome { body, ok: all_matched })
}

