//! Analysis engine for RSS-based drone detection in an interference-limited
//! sensor network.
//!
//! A probe sensor at the origin observes one complex baseband sample per
//! decision: drone signal (under the alternative) plus the aggregate
//! interference of a Poisson field of ground transmitters plus thermal noise.
//! The squared magnitude of that sample is compared against a threshold.
//!
//! The crate computes the false-alarm and detection probabilities of this
//! test analytically (alpha-stable interference model, mixed LOS/NLOS
//! air-to-ground channel), averages detection over the nearest-sensor
//! distance law, and optimizes the sensor density under a false-alarm
//! constraint. A signal-level Monte Carlo simulator built independently from
//! the per-interferer sum cross-validates every analytic result.

pub mod channel;
pub mod detector;
pub mod distributions;
pub mod geometry;
pub mod optimizer;
pub mod quad;
pub mod rng;
pub mod simulator;
pub mod special;
pub mod stats;

pub use channel::{InterferenceModel, NetworkConfig, RhoMode, ShadowingMoment};
pub use detector::{DetectorPoint, EvalMethod, RocMode, RocOutcome};
pub use distributions::StableParams;
pub use geometry::{EnvironmentProfile, PointField};
pub use optimizer::{OptimizationResult, TracePoint};
pub use rng::RngStream;
pub use simulator::{
    EmpiricalRoc, FrozenField, Hypothesis, IQSample, Multipath, PointComparison, TrialConfig,
    ValidationReport,
};

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A closed-form evaluation route was requested outside its domain.
    #[error("evaluation method unavailable: {0}")]
    MethodMismatch(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
