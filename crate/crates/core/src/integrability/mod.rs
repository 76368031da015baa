//! R-matrices, Lax operators and the Yang–Baxter / RLL verifiers.

mod checks;
mod lax;
mod r_matrix;

pub use checks::{check_rll, check_ybe, rll_matrix_form_residual, CheckStatus, Param, ResidualReport};
pub use lax::{nested_lax, tj_lax, tj_nested_lax, xxx_lax, LaxKind, LaxSpec, SINGULAR_GUARD};
pub use r_matrix::{nested_r_matrix, tj_r_matrix, xxx_r_matrix, RMatrixKind, RMatrixSpec};
