use thiserror::Error;

/// Errors raised by constructors, kernels and protocols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid material parameter `{name}`: {reason}")]
    Material { name: &'static str, reason: &'static str },

    #[error("invalid device geometry: {0}")]
    Geometry(&'static str),

    #[error("cell edge {cell:.3e} m is not below the exchange length {exchange_length:.3e} m")]
    CellTooCoarse { cell: f64, exchange_length: f64 },

    #[error("direction must be a unit vector (|d| = {norm})")]
    NotUnit { norm: f64 },

    #[error("magnetization at cell {cell} is not normalized (|m| = {norm})")]
    NotNormalized { cell: usize, norm: f64 },

    #[error("position ({x:.3e}, {y:.3e}) m lies outside the track")]
    OutOfBounds { x: f64, y: f64 },

    #[error("skyrmion radius must span at least two cells")]
    RadiusTooSmall,

    #[error("grid mismatch: expected {expected} cells, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("time step {dt:.3e} s exceeds the stability bound {bound:.3e} s")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("adaptive integrator could not meet tolerance at the minimum step {dt_min:.3e} s")]
    StepUnderflow { dt_min: f64 },

    #[error("invalid integrator setting: {0}")]
    Integrator(&'static str),

    #[error("region contains no cells")]
    EmptyRegion,

    #[error("invalid protocol setting: {0}")]
    Protocol(&'static str),

    #[error("no seeded skyrmion survived relaxation; the parameters do not support skyrmions")]
    NoSurvivors,

    #[error("plasticity criteria disagree: weight change {weight_delta:.4} vs {crossings} net crossings")]
    ClassifierDisagreement { weight_delta: f64, crossings: i64 },
}

pub type Result<T> = core::result::Result<T, Error>;
