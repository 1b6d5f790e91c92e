//! Numerical toolkit for bivariate cause-effect learning under distribution
//! shift.
//!
//! The crate fits additive noise models and infers causal direction
//! ([`anm`]), shares one mechanism across domains with differing noise
//! ([`conditional`]), localizes which factor of a joint distribution changed
//! and inverts injective conditionals ([`spectral`]), adapts predictors
//! across covariate shift, prior probability shift, concept drift and
//! transfer settings ([`shift`]), and stress-tests when self-training helps
//! ([`sslbench`]). Densities live on uniform grids ([`density`]); all
//! randomness flows from explicit seeds ([`seeding`]).
//!
//! Data-parallel inner loops (permutation replicates, benchmark trials) run
//! on rayon under the default `parallel` feature and fall back to sequential
//! execution without it; results are identical either way.

pub mod anm;
pub mod conditional;
pub mod dataset;
pub mod density;
pub mod discrete;
pub mod error;
pub mod exec;
mod fft;
pub mod hsic;
pub mod regression;
pub mod seeding;
pub mod shift;
pub mod spectral;
pub mod sslbench;

pub use dataset::Dataset;
pub use density::{convolve, estimate_density, estimate_density_on_grid, Bandwidth, GridDensity};
pub use discrete::{DiscreteDistribution, StochasticMatrix};
pub use error::{Error, Result};
pub use exec::ExecMode;
