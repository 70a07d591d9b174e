//! Two-exchange latency-arbitrage simulator and analytics toolkit.
//!
//! An investor splits a large order across a liquid exchange L and a small
//! exchange S; random network latency lets a colocated high-frequency trader
//! front-run whichever leg executes late. The crate provides:
//!
//! - [`market`]: demand curves, equilibrium, order splitting, and the
//!   expenditure ranking `E_sim < E_L < E_S`.
//! - [`latency`]: Gaussian and empirical latency models plus catalog ingestion.
//! - [`analytics`]: closed-form outcome probabilities, the optimal order
//!   delay under Gaussian latency, and execution-time selection for timed
//!   (execute-at-T) orders.
//! - [`engine`]: a seeded, parallel Monte Carlo event simulator used as the
//!   brute-force oracle for every closed form.
//! - [`scenario`] / [`cli`]: JSON scenario files and the `latarb` binary.
//!
//! Model math is generic over [`scalar::Real`] (`f32` or `f64`); all type
//! parameters default to `f64`, which the engine and CLI use throughout.

pub mod analytics;
pub mod cli;
pub mod engine;
pub mod latency;
pub mod market;
pub mod math;
pub mod scenario;
pub mod scalar;

pub use analytics::{CostProfile, DelaySolution, OutcomeProbabilities};
pub use engine::{Classification, OrderKind, SimConfig, SimReport, TrialOutcome};
pub use latency::{GaussianLatency, LatencyModel, LatencyPair, SamplingMode};
pub use market::{EquilibriumState, ExpenditureTriple, LinearMarketPair};
pub use scalar::Real;

/// Default scalar used by the engine and CLI.
pub type Scalar = f64;
/// Milliseconds.
pub type Millis = f64;
/// A probability in `[0, 1]`.
pub type Probability = f64;
