//! Error type shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong while building states, measuring them, or
/// analyzing a pre- and post-selected system.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout mismatch: {left} vs {right}")]
    LayoutMismatch { left: String, right: String },

    #[error("subsystem dimension {dim} is invalid; every subsystem must have dimension >= 2")]
    BadSubsystemDim { dim: usize },

    #[error("total dimension {dim} exceeds the supported cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("amplitude vector has length {got}, but the layout requires {want}")]
    AmplitudeLength { got: usize, want: usize },

    #[error("matrix has {got} entries, but a {dim}x{dim} operator requires {want}")]
    MatrixShape { got: usize, want: usize, dim: usize },

    #[error("state is not normalized: <psi|psi> = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("cannot normalize a state with vanishing norm ({norm_sqr:.3e})")]
    ZeroNorm { norm_sqr: f64 },

    #[error("subsystem index {index} out of range for {count} subsystem(s)")]
    SubsystemIndex { index: usize, count: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },

    #[error("operator is not a projector (max deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid observable:\n{report}")]
    InvalidObservable { report: String },

    #[error("unknown outcome label '{label}'")]
    UnknownOutcome { label: String },

    #[error("forced outcome '{label}' has probability {probability:.3e}, at or below eps; the outcome is impossible")]
    ImpossibleOutcome { label: String, probability: f64 },

    #[error("measurement step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("event '{event}' in ordering [{ordering}]: {source}")]
    OrderingFailed {
        event: String,
        ordering: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown event id '{id}' in ordering")]
    UnknownEvent { id: String },

    #[error("ordering [{ordering}] is not a permutation of the declared event set")]
    NotAPermutation { ordering: String },

    #[error("an ordering comparison requires at least two orderings")]
    TooFewOrderings,

    #[error("event '{id}' has no forced outcome; replaying a trajectory requires one")]
    UnforcedEvent { id: String },

    #[error("post-selection unreachable: every intermediate amplitude vanishes (sum of squares {total:.3e})")]
    UnreachablePostSelection { total: f64 },

    #[error("weak value undefined: pre- and post-selected states are orthogonal (|<post|pre>| = {overlap:.3e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("cannot parse operator spec '{spec}': {reason}")]
    BadOperatorSpec { spec: String, reason: String },

    #[error("scenario document is not valid JSON: {0}")]
    ScenarioParse(String),

    #[error("scenario validation failed:\n{report}")]
    ScenarioInvalid { report: String },
}

pub type Result<T> = std::result::Result<T, Error>;
