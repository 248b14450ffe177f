//! Diffusion-based distributed state estimation on power-grid graphs.
//!
//! Four per-iteration algorithms (diffusion ATC, the coordinated area
//! baseline M-CSE, exhaustive-search topology adaptation DESTA and
//! sparsity-inspired topology adaptation DSITA) run over a bus graph with
//! Hastings or Metropolis combination weights, driven by a seeded Monte
//! Carlo harness that reports network MSE and per-bus phase angle gap.
//!
//! All numerics are generic over [`scalar::Scalar`] (`f32`/`f64`); the
//! aliases below pin `f64`, which is what the harness and CLI use.

pub mod combiner;
pub mod estimators;
pub mod harness;
pub mod measurement;
pub mod metrics;
pub mod scalar;
pub mod topology;

pub use estimators::Algorithm;

/// `f64` aliases for the main domain types.
pub type Topology64 = topology::Topology<f64>;
pub type StateVector64 = measurement::StateVector<f64>;
pub type MeasurementSample64 = measurement::MeasurementSample<f64>;
pub type RegressorScheme64 = measurement::RegressorScheme<f64>;
pub type WeightMatrix64 = combiner::WeightMatrix<f64>;
pub type EstimatorState64 = estimators::EstimatorState<f64>;
pub type EstimatorParams64 = estimators::EstimatorParams<f64>;
pub type MetricsTrace64 = metrics::MetricsTrace<f64>;
