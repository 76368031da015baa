//! Shared fixtures for the benchmarks.

use anyon_qism::chain::ModelSpec;
use anyon_qism::graded::GradingTable;
use anyon_qism::linalg::{phase, Matrix, C64};

pub const ETA: f64 = 1.0;

/// Generic statistics angles, away from the special points 0 and π.
pub fn xxx(num_sites: usize) -> ModelSpec {
    ModelSpec::xxx_angle(num_sites, ETA, 0.9).unwrap()
}

pub fn tj(num_sites: usize) -> ModelSpec {
    ModelSpec::tj_angles(num_sites, ETA, [0.4, -1.1, 2.3]).unwrap()
}

/// Dense operator with deterministic, non-degenerate entries.
pub fn operator(dim: usize) -> Matrix {
    Matrix::from_fn(dim, dim, |i, j| C64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 * 0.3))
}

pub fn grading(dim: usize) -> GradingTable {
    let mut entries = Vec::new();
    for i in 1..=dim {
        for j in i..=dim {
            entries.push((i, j, phase(0.37 * (i * j) as f64)));
        }
    }
    GradingTable::new(dim, &entries).unwrap()
}
