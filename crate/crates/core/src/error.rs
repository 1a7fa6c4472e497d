//! Crate-wide error type.

use thiserror::Error;

use crate::dynamics::TrajectoryRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what} must be nonnegative, got {value}")]
    NegativeInput { what: &'static str, value: f64 },

    #[error("invalid {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    #[error("law {law} is second-order but the state carries no velocities")]
    MissingVelocities { law: String },

    #[error("law {law} is first-order but the state carries velocities")]
    UnexpectedVelocities { law: String },

    #[error("vertex {0} paired with itself")]
    SameVertex(usize),

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("the lower bound is vacuous for compact-support weights")]
    CompactSupportBound,

    #[error("discontinuous step weights are restricted to discrete-time laws")]
    DiscontinuousWeightInContinuousTime,

    #[error("integration blew up{} (|coordinate| reached {magnitude:.3e})",
            time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    IntegrationBlowup {
        time: Option<f64>,
        magnitude: f64,
        /// Samples recorded before the blowup, when produced by `simulate`.
        partial: Option<Box<TrajectoryRecord>>,
    },

    #[error("monitor {monitor} is incompatible with law {law}: {why}")]
    IncompatibleMonitor {
        monitor: String,
        law: String,
        why: String,
    },

    #[error("criterion {criterion} not applicable: {why}")]
    IncompatibleCriterion { criterion: String, why: String },

    #[error("no closed-form consensus value for law {law}: {why}")]
    NoClosedForm { law: String, why: String },

    #[error("gain constraints apply to discrete-time laws only")]
    GainCheckContinuous,

    #[error(
        "opinions are not symmetrically distributed: mirror pair {index} off by {residual:.3e}"
    )]
    AsymmetricProfile { index: usize, residual: f64 },

    #[error("unknown builtin scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
