//! Detection of planted dense subhypergraphs in heterogeneous random
//! m-uniform hypergraphs.
//!
//! The crate provides, bottom to top:
//!
//! * [`math`]: the scalar kernel (rate function, Bernoulli exponential
//!   family, tail bounds, exact binomials, moment-ratio bounds);
//! * [`hypergraph`]: canonical edges, vertex sets, counting primitives,
//!   colex indexing, and CSV edge lists;
//! * [`model`]: homogeneous / rank-1 / explicit null models and planted
//!   alternatives;
//! * [`sampler`]: counter-based seeded generation, coupled across the
//!   null and alternatives;
//! * [`scan`]: the known-probability scan test and its adaptive variant
//!   with the plug-in edge-rate estimator;
//! * [`boundary`]: densest-subset functionals, the detection-boundary
//!   conditions, and regime diagnostics;
//! * [`lr`]: exact and truncated likelihood-ratio oracles;
//! * [`experiment`]: the Monte Carlo risk harness and its table outputs;
//! * [`config`]: the TOML experiment schema shared with the CLI.

pub mod boundary;
pub mod config;
pub mod error;
pub mod experiment;
pub mod hypergraph;
pub mod lr;
pub mod math;
pub mod model;
pub mod sampler;
pub mod scan;

pub use error::{Error, Result};
