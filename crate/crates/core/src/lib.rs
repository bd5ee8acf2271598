//! Numerical laboratory for sum-over-paths amplitudes and local
//! hidden-phase models.
//!
//! - [`amplitude`]: complex amplitudes and clock-pointer angles.
//! - [`toy`]: classical twin clock-pointer experiment.
//! - [`paths`]: discretized sums over mirror paths and Cornu spirals.
//! - [`interferometer`]: two-particle interferometer amplitudes.
//! - [`sampler`]: per-trial local beamsplitter model.
//! - [`bell`]: CHSH and three-setting statistics over any source.
//! - [`spin`]: Stern–Gerlach cascades with a spinor oracle.
//! - [`nonmeasurable`]: disjoint-ball packing in path space.
//! - [`cli`]: the `bellpaths` command line.

pub mod amplitude;
pub mod bell;
pub mod cli;
pub mod error;
pub mod interferometer;
pub mod montecarlo;
pub mod nonmeasurable;
pub mod paths;
pub mod sampler;
pub mod spin;
pub mod toy;

pub use error::{Error, Result};
