use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{ChainLayout, GradingTable};
use crate::integrability::{tj_lax, tj_r_matrix, xxx_lax, xxx_r_matrix, LaxSpec, RMatrixSpec};
use crate::linalg::{phase, C64};

/// Default row cap for dense operators, overridden by `ANYONQISM_DIM_CAP`.
pub const DEFAULT_DIM_CAP: usize = 20_000;
pub const DIM_CAP_ENV: &str = "ANYONQISM_DIM_CAP";

/// Hopping amplitude and exchange coupling at the integrable point of the t–J chain.
pub const TJ_HOPPING: f64 = 1.0;
pub const TJ_EXCHANGE: f64 = 2.0;

pub fn default_dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Xxx,
    Tj,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Xxx => "xxx",
            ModelKind::Tj => "tj",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistics {
    Xxx { q: C64 },
    Tj { q1: C64, q2: C64, q3: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub num_sites: usize,
    pub eta: C64,
    pub stats: Statistics,
    pub dim_cap: usize,
}

fn check_unimodular(values: &[C64]) -> Result<()> {
    for &value in values {
        if (value.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnimodularQ { value });
        }
    }
    Ok(())
}

impl ModelSpec {
    pub fn xxx(num_sites: usize, eta: C64, q: C64) -> Result<Self> {
        Self::new(num_sites, eta, Statistics::Xxx { q })
    }

    pub fn tj(num_sites: usize, eta: C64, q1: C64, q2: C64, q3: C64) -> Result<Self> {
        Self::new(num_sites, eta, Statistics::Tj { q1, q2, q3 })
    }

    /// XXX chain with real η and `q = e^{iθ}`.
    pub fn xxx_angle(num_sites: usize, eta: f64, theta: f64) -> Result<Self> {
        Self::xxx(num_sites, C64::new(eta, 0.0), phase(theta))
    }

    /// t–J chain with real η and `q_k = e^{iθ_k}`.
    pub fn tj_angles(num_sites: usize, eta: f64, theta: [f64; 3]) -> Result<Self> {
        Self::tj(num_sites, C64::new(eta, 0.0), phase(theta[0]), phase(theta[1]), phase(theta[2]))
    }

    pub fn new(num_sites: usize, eta: C64, stats: Statistics) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::InvalidConfig("L must be ≥ 1".into()));
        }
        if eta.norm() == 0.0 {
            return Err(Error::ZeroEta);
        }
        match stats {
            Statistics::Xxx { q } => check_unimodular(&[q])?,
            Statistics::Tj { q1, q2, q3 } => check_unimodular(&[q1, q2, q3])?,
        }
        Ok(ModelSpec { num_sites, eta, stats, dim_cap: default_dim_cap() })
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn with_num_sites(&self, num_sites: usize) -> Result<Self> {
        let mut m = Self::new(num_sites, self.eta, self.stats)?;
        m.dim_cap = self.dim_cap;
        Ok(m)
    }

    pub fn with_stats(&self, stats: Statistics) -> Result<Self> {
        let mut m = Self::new(self.num_sites, self.eta, stats)?;
        m.dim_cap = self.dim_cap;
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        match self.stats {
            Statistics::Xxx { .. } => ModelKind::Xxx,
            Statistics::Tj { .. } => ModelKind::Tj,
        }
    }

    pub fn local_dim(&self) -> usize {
        match self.kind() {
            ModelKind::Xxx => 2,
            ModelKind::Tj => 3,
        }
    }

    pub fn grading(&self) -> GradingTable {
        match self.stats {
            Statistics::Xxx { q } => GradingTable::xxx(q).expect("validated"),
            Statistics::Tj { q1, q2, q3 } => GradingTable::tj(q1, q2, q3).expect("validated"),
        }
    }

    pub fn lax(&self) -> LaxSpec {
        match self.stats {
            Statistics::Xxx { q } => xxx_lax(self.eta, q),
            Statistics::Tj { q1, q2, q3 } => tj_lax(self.eta, q1, q2, q3),
        }
        .expect("validated")
    }

    pub fn r_matrix(&self) -> RMatrixSpec {
        let r = match self.kind() {
            ModelKind::Xxx => xxx_r_matrix(self.eta),
            ModelKind::Tj => tj_r_matrix(self.eta),
        };
        r.and_then(|r| r.with_grading(self.grading())).expect("validated")
    }

    /// Chain without auxiliary factor.
    pub fn layout(&self) -> ChainLayout {
        ChainLayout::new(self.num_sites, self.local_dim(), 0).expect("validated")
    }

    /// Chain with the auxiliary space of the monodromy.
    pub fn aux_layout(&self) -> ChainLayout {
        self.layout().with_aux(self.local_dim())
    }

    pub fn check_cap(&self, dim: usize) -> Result<()> {
        if dim > self.dim_cap {
            Err(Error::ResourceLimit { dim, cap: self.dim_cap })
        } else {
            Ok(())
        }
    }
}
