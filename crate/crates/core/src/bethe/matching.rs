use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roots::BetheRoots;
use crate::chain::{explicit_hamiltonian, resolve_levels, restrict, transfer_matrix, ModelKind, ModelSpec, Sector};
use crate::error::Result;
use crate::linalg::{general_eigenvalues, is_hermitian, C64};

/// Spectral parameters at which Λ is compared, in units of η.
pub fn default_test_points(eta: C64) -> Vec<C64> {
    [C64::new(0.37, 0.11), C64::new(-0.5, 0.3), C64::new(1.2, -0.4)].iter().map(|z| z * eta).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchOptions {
    pub test_points: Vec<C64>,
    /// Bound on the energy difference and on the relative Λ residual.
    pub tol: f64,
    /// Energies closer than this form one degenerate level.
    pub cluster_tol: f64,
}

impl MatchOptions {
    pub fn new(eta: C64) -> Self {
        MatchOptions { test_points: default_test_points(eta), tol: 1e-7, cluster_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootMatch {
    pub roots: BetheRoots,
    pub energy: Option<C64>,
    pub lambdas: Vec<C64>,
    /// Index of the closest level, in ascending energy order.
    pub level: Option<usize>,
    pub ed_energy: Option<C64>,
    pub energy_residual: f64,
    /// Joint residual of Λ at all test points against the level.
    pub lambda_residual: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedLevel {
    pub level: usize,
    pub energy: C64,
    pub multiplicity: usize,
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub model: ModelKind,
    pub sector: Sector,
    pub test_points: Vec<C64>,
    pub tol: f64,
    pub sector_dim: usize,
    pub entries: Vec<RootMatch>,
    pub matched: usize,
    pub unmatched_levels: Vec<UnmatchedLevel>,
    /// Sector dimension minus the number of matched root sets.
    pub completeness_deficit: usize,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.entries.iter().all(|e| e.matched)
    }
}

type Scorer = dyn Fn(C64, &[C64]) -> (f64, f64) + Sync;

struct LevelData {
    energy: C64,
    multiplicity: usize,
    /// Residual of a candidate `(E, Λ_k)` against this level.
    score: Box<Scorer>,
}

fn hermitian_levels(
    model: &ModelSpec,
    sector: Sector,
    taus: &[crate::graded::ChainOperator],
    cluster_tol: f64,
) -> Result<Vec<LevelData>> {
    let h = explicit_hamiltonian(model)?;
    let refs: Vec<_> = taus.iter().collect();
    let levels = resolve_levels(&h, &refs, Some(sector), cluster_tol)?;
    Ok(levels
        .into_iter()
        .map(|lv| {
            let energy = C64::new(lv.energy, 0.0);
            let multiplicity = lv.multiplicity();
            LevelData {
                energy,
                multiplicity,
                score: Box::new(move |e: C64, lam: &[C64]| ((e - energy).norm(), lv.joint_residual(lam))),
            }
        })
        .collect())
}

/// Fallback for non-Hermitian `H` (complex η): nearest eigenvalues of each
/// operator separately.
fn general_levels(
    model: &ModelSpec,
    sector: Sector,
    taus: &[crate::graded::ChainOperator],
    cluster_tol: f64,
) -> Result<Vec<LevelData>> {
    let h = explicit_hamiltonian(model)?;
    let basis = sector.basis(&h.layout)?;
    let energies = general_eigenvalues(&restrict(&h.matrix, &basis))?;
    let tau_spectra: Vec<Vec<C64>> =
        taus.iter().map(|t| general_eigenvalues(&restrict(&t.matrix, &basis))).collect::<Result<_>>()?;
    let tau_spectra = std::sync::Arc::new(tau_spectra);
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for e in energies {
        match clusters.iter_mut().find(|(c, _)| (c - e).norm() <= cluster_tol) {
            Some(c) => c.1 += 1,
            None => clusters.push((e, 1)),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(energy, multiplicity)| {
            let spectra = tau_spectra.clone();
            LevelData {
                energy,
                multiplicity,
                score: Box::new(move |e: C64, lam: &[C64]| {
                    let l = lam
                        .iter()
                        .zip(spectra.iter())
                        .map(|(x, sp)| sp.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min) / x.norm().max(1.0))
                        .fold(0.0, f64::max);
                    ((e - energy).norm(), l)
                }),
            }
        })
        .collect())
}

/// Pairs each root set with the exact level that best reproduces its energy
/// and its transfer eigenvalues at the test points.
pub fn match_spectrum(
    model: &ModelSpec,
    sector: Sector,
    root_sets: &[BetheRoots],
    opts: &MatchOptions,
) -> Result<MatchReport> {
    let taus = opts
        .test_points
        .par_iter()
        .map(|&x| transfer_matrix(model, x))
        .collect::<Result<Vec<_>>>()?;
    let layout = model.layout();
    let basis = sector.basis(&layout)?;
    let h = explicit_hamiltonian(model)?;
    let levels = if is_hermitian(&restrict(&h.matrix, &basis), 1e-12) {
        hermitian_levels(model, sector, &taus, opts.cluster_tol)?
    } else {
        general_levels(model, sector, &taus, opts.cluster_tol)?
    };

    let entries: Vec<RootMatch> = root_sets
        .par_iter()
        .map(|roots| {
            let energy = roots.energy().ok();
            let lambdas: Option<Vec<C64>> = opts.test_points.iter().map(|&x| roots.lambda(x).ok()).collect();
            let mut best: Option<(usize, f64, f64)> = None;
            if let (Some(e), Some(lam)) = (energy, &lambdas) {
                for (k, lv) in levels.iter().enumerate() {
                    let (de, dl) = (lv.score)(e, lam);
                    if best.is_none_or(|(_, be, bl)| de.max(dl) < be.max(bl)) {
                        best = Some((k, de, dl));
                    }
                }
            }
            let (level, energy_residual, lambda_residual) = match best {
                Some((k, de, dl)) => (Some(k), de, dl),
                None => (None, f64::INFINITY, f64::INFINITY),
            };
            RootMatch {
                roots: roots.clone(),
                energy,
                lambdas: lambdas.unwrap_or_default(),
                level,
                ed_energy: level.map(|k| levels[k].energy),
                energy_residual,
                lambda_residual,
                matched: energy_residual < opts.tol && lambda_residual < opts.tol,
            }
        })
        .collect();

    let mut counts = vec![0usize; levels.len()];
    for e in entries.iter().filter(|e| e.matched) {
        counts[e.level.expect("matched entries have a level")] += 1;
    }
    let unmatched_levels = levels
        .iter()
        .enumerate()
        .filter(|(k, lv)| counts[*k] < lv.multiplicity)
        .map(|(k, lv)| UnmatchedLevel { level: k, energy: lv.energy, multiplicity: lv.multiplicity, matched: counts[k] })
        .collect();
    let matched = entries.iter().filter(|e| e.matched).count();
    Ok(MatchReport {
        model: model.kind(),
        sector,
        test_points: opts.test_points.clone(),
        tol: opts.tol,
        sector_dim: basis.len(),
        entries,
        matched,
        unmatched_levels,
        completeness_deficit: basis.len().saturating_sub(matched),
    })
}
