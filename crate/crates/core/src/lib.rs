//! Ground states of stoquastic spin Hamiltonians with an autoregressive
//! graphical-model ansatz, trained by variational Monte Carlo and checked
//! against exact oracles.

pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod math;
pub mod rng;
pub mod spin;

pub use error::{Error, Result};
pub mod checkpoint;
pub mod exact;
pub mod vmc;

// The book's snippets are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/ansatz.md")]
    mod ansatz {}
    #[doc = include_str!("../../../book/src/vmc.md")]
    mod vmc {}
    #[doc = include_str!("../../../book/src/exact-learning.md")]
    mod exact_learning {}
}
