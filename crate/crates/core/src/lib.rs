//! Biparental Moran model with viability selection.
//!
//! A population of `N` haploid individuals lives on sites `0..N`. At every
//! step a mother and a father are drawn uniformly with replacement and their
//! offspring replaces an individual drawn with probability proportional to
//! its death weight (1 if advantaged, `1 + s` otherwise). The offspring is
//! advantaged iff its mother is.
//!
//! The crate tracks how much of the genome descends from the initially
//! advantaged individuals ([`weights`]), provides the marginal count chain and
//! its skeleton walk ([`chains`]), evaluates the large-population limit in
//! closed form ([`theory`]) and reproduces the Monte Carlo studies
//! ([`experiments`]).
//!
//! Sites are 0-based throughout.

pub mod chains;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod selftest;
pub mod sim;
pub mod theory;
pub mod weights;

pub use error::{Error, Result};
pub use model::{PopulationState, RunConfig, StepEvent};
pub use sim::Simulation;
pub use theory::{TheoryParams, TheoryPoint};
pub use weights::{TrajectoryPoint, WeightMatrix, WeightVector};

/// Version string echoed into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
