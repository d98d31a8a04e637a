//! Exhaustive ground truth for small systems.
//!
//! Everything here enumerates the full `2^n` basis (index convention from
//! [`crate::spin`]) and is limited to [`MAX_DENSE_SITES`] sites.

mod conditionals;
mod dense;
mod export;
mod free_fermion;
mod screening;
mod variational;

pub use conditionals::{closed_form_conditional_energy, exact_conditionals, ConditionalTable, WeightTable};
pub use dense::{ground_state_dense, ground_state_dense_with, DenseState, PowerOptions, SparseRows};
pub use export::{order_profile_csv, poly_csv, weights_csv};
pub use free_fermion::tfim_chain_energy;
pub use screening::{
    aggregate_profiles, order_profile, screen_exact, fit_pairwise, OrderStats, PolyEnergy, ScreenOutcome, ScreeningProblem,
    NEWTON_GRAD_TOL,
};
pub use variational::{log_prob_table, variational_energy_exact};

/// Largest system treated by dense enumeration.
pub const MAX_DENSE_SITES: usize = 16;

pub(crate) fn ensure_dense(n: usize) -> crate::Result<()> {
    if n > MAX_DENSE_SITES {
        return Err(crate::Error::TooLarge { n, limit: MAX_DENSE_SITES });
    }
    Ok(())
}
