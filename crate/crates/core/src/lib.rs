//! Simulation and numerical-verification toolkit for self-similar
//! fragmentations carved out of excursions: samplers for the underlying
//! random paths, the level-set interval fragmentation, the metric-space
//! machinery used to compare open sets, limit-object constructions near
//! the extinction time, closed-form laws, and a Monte-Carlo experiment
//! harness with a CLI on top.

pub mod analytics;
pub mod paths;
pub mod error;
pub mod fragmentation;
pub mod harness;
pub mod io;
pub mod limits;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use rng::{CounterRng, Seed};
pub use scalar::Real;

/// Concrete double-precision aliases for the generic core types.
pub type SampledPath64 = paths::SampledPath<f64>;
pub type OpenSet64 = fragmentation::OpenSet<f64>;
pub type RankedMasses64 = fragmentation::RankedMasses<f64>;
pub type HInfinitySample64 = limits::HInfinitySample<f64>;
