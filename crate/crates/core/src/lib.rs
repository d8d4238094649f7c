//! Simulation and verification laboratory for a ranked-deletion particle
//! system and for Poisson limits of sums of dependent point processes.
//!
//! Particles arrive over time, each carrying a real-valued attribute drawn
//! from a continuous distribution. An arriving particle attempts to delete
//! the particles already present according to a deletion kernel (in the
//! ranked variant, only particles with strictly smaller attributes are at
//! risk). The crate provides:
//!
//! - [`model`]: attribute distributions, deletion kernels, arrival
//!   processes, observation windows, and the closed-form mean measures
//!   they induce;
//! - [`sim`]: a discrete-event simulator for the live particle process,
//!   with sojourn and departure-batch extraction;
//! - [`theory`]: numeric evaluation of the limit intensity, sojourn laws,
//!   rank-conditional survival, a binomial size-bias identity, and the
//!   Poisson-stationarity functional equation;
//! - [`arrays`]: triangular-array machinery — permutation realizations,
//!   the exact law of deletion-attempt counts, logarithm gap bounds, and
//!   numeric condition values for the Poisson limit theorem;
//! - [`stats`]: goodness-of-fit, dispersion, independence, and
//!   homogeneity tests that turn the limit theorems into pass/fail checks;
//! - [`acceptance`]: the end-to-end verification suite.

pub mod acceptance;
pub mod arrays;
pub mod model;
pub mod quad;
pub mod sim;
pub mod stats;
pub mod theory;
