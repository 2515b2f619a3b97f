use thiserror::Error;

use crate::histories::ConsistencyReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("time slice must have at least one channel")]
    EmptySlice,

    #[error("channel label must be non-empty")]
    EmptyLabel,

    #[error("duplicate channel label `{label}` in slice t{time}")]
    DuplicateLabel { label: String, time: usize },

    #[error("unknown channel `{label}` on slice t{time}")]
    UnknownLabel { label: String, time: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("operands live on different slices (t{left} vs t{right})")]
    SliceMismatch { left: usize, right: usize },

    #[error("operator is not a projector (hermiticity residual {hermiticity:.3e}, idempotence residual {idempotence:.3e})")]
    NotAProjector { hermiticity: f64, idempotence: f64 },

    #[error("cannot build a projector from a zero ket")]
    ZeroKet,

    #[error("projectors do not form a decomposition of the identity: {0}")]
    NotAPdi(String),

    #[error("an empty set of projectors is not a decomposition")]
    EmptyPdi,

    #[error("time index {index} out of range 0..={max}")]
    TimeOutOfRange { index: usize, max: usize },

    #[error("step {step} does not chain: {reason}")]
    BrokenChain { step: usize, reason: String },

    #[error("dynamics needs at least one step")]
    NoSteps,

    #[error("history events must have strictly increasing times (t{previous} then t{next})")]
    UnorderedEvents { previous: usize, next: usize },

    #[error("history event at t{time} precedes or coincides with the initial state at t{initial}")]
    EventBeforeInitial { time: usize, initial: usize },

    #[error("family marked complete does not sum to the identity (residual {residual:.3e})")]
    IncompleteFamily { residual: f64 },

    #[error("family is inconsistent (max overlap {:.3e})", .0.max_overlap)]
    Inconsistent(ConsistencyReport),

    #[error("conditioning event has zero probability")]
    ZeroProbabilityCondition,

    #[error("event at t{time} is not expressible in the family (history {history} neither contained in nor disjoint from it)")]
    NotExpressible { time: usize, history: usize },

    #[error("refinement parts do not sum to any projector used at t{time}")]
    RefinementMismatch { time: usize },

    #[error("refinement parts are not mutually orthogonal (residual {residual:.3e})")]
    RefinementNotOrthogonal { residual: f64 },

    #[error("final event has zero forward probability")]
    ImpossibleFinalEvent,

    #[error("alpha2 = {0} violates 0 < alpha, beta < 1")]
    InvalidAlpha2(f64),

    #[error("epsilon = {0} violates 0 <= epsilon < 1")]
    InvalidEpsilon(f64),

    #[error("pre- and post-selected states are orthogonal at t{time} (overlap {overlap:.3e})")]
    VanishingOverlap { time: usize, overlap: f64 },

    #[error("invalid probe `{probe}`: {reason}")]
    InvalidProbe { probe: String, reason: String },

    #[error("initial state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("sample count must be at least 1")]
    NoSamples,
}
