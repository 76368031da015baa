use std::path::{Path, PathBuf};

use anyon_qism::bethe::Strategy;
use anyon_qism::chain::{ModelKind, ModelSpec, Sector};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Solver choice; `all` takes the union of the three strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StrategyArg {
    LogNewton,
    Multistart,
    Homotopy,
    All,
}

impl StrategyArg {
    pub fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::LogNewton => vec![Strategy::LogNewton],
            StrategyArg::Multistart => vec![Strategy::Multistart],
            StrategyArg::Homotopy => vec![Strategy::Homotopy],
            StrategyArg::All => vec![Strategy::LogNewton, Strategy::Multistart, Strategy::Homotopy],
        }
    }
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "xxx" => Ok(ModelKind::Xxx),
        "tj" => Ok(ModelKind::Tj),
        _ => Err(format!("unknown model '{s}' (expected xxx or tj)")),
    }
}

/// Settings shared by every subcommand. Each field may come from the
/// command line or from the JSON file given by `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigArgs {
    /// JSON file with any of the settings below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelKind>,
    /// Number of sites
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub num_sites: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Statistics angle of the XXX chain, q = e^{iθ}
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta3: Option<f64>,
    /// Sector "N" (XXX) or "N,M" (t–J); repeatable, default all sectors
    #[arg(long = "sector")]
    #[serde(rename = "sectors")]
    pub sectors: Option<Vec<String>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides every check tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Number of sweep points on [0, 2π], endpoints included
    #[arg(long)]
    pub grid: Option<usize>,
    /// Angles varied by the sweep (1-based, comma separated)
    #[arg(long, value_delimiter = ',')]
    pub vary: Option<Vec<usize>>,
    /// Spectral parameter "re,im" at which τ eigenvalues are reported
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<String>,
    /// Also solve and match Bethe roots at every sweep point
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub bethe: Option<bool>,
    /// Record wall-clock time (makes output run-dependent)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub timing: Option<bool>,
}

impl ConfigArgs {
    fn overlay(self, file: ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            config: self.config,
            model: self.model.or(file.model),
            num_sites: self.num_sites.or(file.num_sites),
            eta: self.eta.or(file.eta),
            theta: self.theta.or(file.theta),
            theta1: self.theta1.or(file.theta1),
            theta2: self.theta2.or(file.theta2),
            theta3: self.theta3.or(file.theta3),
            sectors: self.sectors.or(file.sectors),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
            tol: self.tol.or(file.tol),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            strategy: self.strategy.or(file.strategy),
            grid: self.grid.or(file.grid),
            vary: self.vary.or(file.vary),
            lambda: self.lambda.or(file.lambda),
            bethe: self.bethe.or(file.bethe),
            timing: self.timing.or(file.timing),
        }
    }
}

/// Fully resolved settings, echoed into every output record. The output
/// path is left out so that the record does not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(rename = "L")]
    pub num_sites: usize,
    pub eta: f64,
    /// `[θ]` for XXX, `[θ1, θ2, θ3]` for t–J.
    pub theta: Vec<f64>,
    /// Empty means all sectors.
    #[serde(serialize_with = "sectors_as_strings")]
    pub sectors: Vec<Sector>,
    /// Random samples (verify) or multistart seeds (bethe); per-command default when absent.
    pub samples: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub format: Format,
    /// Per-command default when absent.
    pub strategy: Option<StrategyArg>,
    pub grid: usize,
    pub vary: Vec<usize>,
    pub lambda: Option<[f64; 2]>,
    pub bethe: bool,
    pub timing: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn sectors_as_strings<S: serde::Serializer>(v: &[Sector], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn read_file(path: &Path) -> Result<ConfigArgs, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{name} must be finite")))
    }
}

impl RunConfig {
    pub fn resolve(args: ConfigArgs) -> Result<Self, CliError> {
        let args = match &args.config {
            Some(p) => {
                let file = read_file(p)?;
                args.overlay(file)
            }
            None => args,
        };
        let model = args.model.unwrap_or(ModelKind::Xxx);
        let num_sites = args.num_sites.unwrap_or(4);
        if num_sites == 0 {
            return Err(CliError::Config("L must be ≥ 1".into()));
        }
        let eta = finite("eta", args.eta.unwrap_or(1.0))?;
        if eta == 0.0 {
            return Err(CliError::Config("eta must be nonzero".into()));
        }
        let theta = match model {
            ModelKind::Xxx => {
                if args.theta1.or(args.theta2).or(args.theta3).is_some() {
                    return Err(CliError::Config("--theta1..3 apply to the tj model; use --theta".into()));
                }
                vec![finite("theta", args.theta.unwrap_or(0.0))?]
            }
            ModelKind::Tj => {
                if args.theta.is_some() {
                    return Err(CliError::Config("the tj model takes --theta1, --theta2, --theta3".into()));
                }
                let t = [args.theta1, args.theta2, args.theta3];
                t.iter().map(|x| finite("theta", x.unwrap_or(0.0))).collect::<Result<_, _>>()?
            }
        };
        let mut sectors = Vec::new();
        for s in args.sectors.unwrap_or_default() {
            let sector: Sector = s.parse().map_err(|e: anyon_qism::error::Error| CliError::Config(e.to_string()))?;
            let fits = match (model, sector.m) {
                (ModelKind::Xxx, None) => sector.n <= num_sites,
                (ModelKind::Tj, Some(m)) => sector.n <= num_sites && m <= sector.n,
                _ => false,
            };
            if !fits {
                return Err(CliError::Config(format!("sector {sector} does not fit the {model} chain with L = {num_sites}")));
            }
            if !sectors.contains(&sector) {
                sectors.push(sector);
            }
        }
        let samples = args.samples;
        if samples == Some(0) {
            return Err(CliError::Config("samples must be ≥ 1".into()));
        }
        if let Some(t) = args.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config("tol must be positive".into()));
            }
        }
        let grid = args.grid.unwrap_or(13);
        if grid < 2 {
            return Err(CliError::Config("grid must be ≥ 2".into()));
        }
        let vary = args.vary.unwrap_or_else(|| (1..=theta.len()).collect());
        if vary.is_empty() || vary.iter().any(|&k| k == 0 || k > theta.len()) {
            return Err(CliError::Config(format!("vary must list angles between 1 and {}", theta.len())));
        }
        let lambda = match args.lambda {
            None => None,
            Some(s) => {
                let parts: Vec<_> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
                match parts.as_slice() {
                    [Ok(re)] => Some([finite("lambda", *re)?, 0.0]),
                    [Ok(re), Ok(im)] => Some([finite("lambda", *re)?, finite("lambda", *im)?]),
                    _ => return Err(CliError::Config(format!("bad lambda '{s}', expected \"re,im\""))),
                }
            }
        };
        Ok(RunConfig {
            model,
            num_sites,
            eta,
            theta,
            sectors,
            samples,
            seed: args.seed.unwrap_or(0),
            tol: args.tol,
            format: args.format.unwrap_or(Format::Json),
            strategy: args.strategy,
            grid,
            vary,
            lambda,
            bethe: args.bethe.unwrap_or(false),
            timing: args.timing.unwrap_or(false),
            out: args.out,
        })
    }

    pub fn model_at(&self, theta: &[f64]) -> Result<ModelSpec, CliError> {
        let m = match self.model {
            ModelKind::Xxx => ModelSpec::xxx_angle(self.num_sites, self.eta, theta[0]),
            ModelKind::Tj => ModelSpec::tj_angles(self.num_sites, self.eta, [theta[0], theta[1], theta[2]]),
        };
        Ok(m?)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        self.model_at(&self.theta)
    }

    /// Requested sectors, or every sector of the chain.
    pub fn sector_list(&self, model: &ModelSpec) -> Vec<Sector> {
        if self.sectors.is_empty() {
            Sector::all(&model.layout())
        } else {
            self.sectors.clone()
        }
    }
}
