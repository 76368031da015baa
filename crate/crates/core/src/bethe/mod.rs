//! Bethe-ansatz eigenvalues, equations and energies, a root solver, and
//! matching of root sets against exact spectra.

mod matching;
mod roots;
mod solver;

pub use matching::{match_spectrum, default_test_points, MatchOptions, MatchReport, RootMatch, UnmatchedLevel};
pub use roots::{
    tj_bae_residual, tj_energy, tj_lambda, xxx_bae_residual, xxx_bae_residual_unrescaled, xxx_energy, xxx_lambda,
    BetheRoots, BetheRootsTj, BetheRootsXxx, Rapidity, MIN_SEPARATION,
};
pub use solver::{
    solve_bae, solve_log_newton, BetheSolution, QuantumNumbers, SolveReport, SolverOptions, Strategy, ADMISSIBLE_GAP,
    DEDUP_TOL, ROOT_INFINITY,
};
