//! Spectrum-averaged decoherence and state-broadcast diagnostics for a central
//! system coupled to random-matrix environments.
//!
//! The model: a system observable `A` couples to `N` independent environment
//! blocks through `H = A ⊗ Σ_k B_k`, with each `B_k` drawn from the Gaussian
//! unitary ensemble and each environment state drawn from a unitarily
//! invariant measure. The crate provides
//!
//! - samplers for the random operators and states ([`ensembles`]),
//! - closed-form ensemble averages of the decoherence factor and of the
//!   super-fidelity between conditional environment states ([`analytic`]),
//! - Monte Carlo estimators for the same quantities ([`montecarlo`]),
//! - averages over the system observable's own spectrum ([`sysavg`]),
//! - bounds on the distance to the nearest broadcast-structure state and
//!   exact small-system checks ([`sbs`]),
//! - a command-line interface ([`cli`]) reproducing the standard figures.

pub mod analytic;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod sbs;
pub mod specfun;
pub mod sysavg;

pub mod cli;

pub use error::{Error, Result};
