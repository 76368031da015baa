//! Anyon chains: site operators, monodromy and transfer matrices, explicit
//! Hamiltonians and exact spectra.

mod hamiltonian;
mod model;
mod operators;
mod spectrum;
mod transfer;

pub use hamiltonian::{build_tj_hamiltonian, build_xxx_hamiltonian, ExchangeForm};
pub use model::{
    default_dim_cap, ModelKind, ModelSpec, Statistics, DEFAULT_DIM_CAP, DIM_CAP_ENV, TJ_EXCHANGE, TJ_HOPPING,
};
pub use operators::{
    build_site_operators, commutation_suite, tj_local, xxx_local, ChainOperators, SiteOperators, TjOperators,
    XxxOperators,
};
pub use spectrum::{exact_spectrum, resolve_levels, restrict, Level, Sector, Spectrum};
pub use transfer::{
    build_monodromy, commutation_of_transfers, eval_polynomial, fit_affine, hamiltonian_from_transfer,
    transfer_matrix, transfer_polynomial_coeffs, AffineFit, HamiltonianExtraction, SHIFT_CONDITION_LIMIT,
};

/// Explicit Hamiltonian of the model: `H` for XXX, `ηH` (first exchange form) for t–J.
pub fn explicit_hamiltonian(model: &ModelSpec) -> crate::error::Result<crate::graded::ChainOperator> {
    match model.kind() {
        ModelKind::Xxx => build_xxx_hamiltonian(model),
        ModelKind::Tj => build_tj_hamiltonian(model, ExchangeForm::First),
    }
}
