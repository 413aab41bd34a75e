//! Welfare-constrained optimal stopping for two-arm trials.
//!
//! A sponsor runs an experiment and decides when to stop; a regulator
//! approves the treatment when the posterior mean effect is non-negative.
//! The sponsor maximises its own payoff subject to a floor on the regulator's
//! expected welfare, priced by a multiplier `λ`.
//!
//! - [`model`]: priors, utilities, costs, the posterior-variance clock and the
//!   fixed-horizon benchmark.
//! - [`solver`]: backward induction on a binomial lattice and boundary
//!   extraction.
//! - [`simulator`]: Monte Carlo over the stopped posterior-mean process.
//! - [`calibrate`]: bisection on `λ` against a welfare floor, and sweeps.
//! - [`bernoulli`]: finite-sample trials with binary outcomes.
//! - [`scenario`], [`export`], [`cli`]: configuration, artifacts and the
//!   command-line front end.
//!
//! ```
//! use trialstop::model::{rct_welfare, PriorSpec};
//!
//! let prior = PriorSpec::new(0.0, 9.7344, 0.5, 0.5).unwrap();
//! let v0 = rct_welfare(0.0, &prior, 1.0).unwrap();
//! assert!((v0 - 1.1853).abs() < 5e-4);
//! ```

pub mod bernoulli;
pub mod calibrate;
pub mod cli;
pub mod error;
pub mod export;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod simulator;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
