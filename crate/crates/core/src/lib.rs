//! Consistent histories on finite time-sliced quantum systems.
//!
//! The crate models a particle moving through a sequence of labeled channel
//! bases connected by unitary steps. On top of that it provides:
//!
//! - projectors and projective decompositions of the identity ([`statespace`]),
//! - composed forward and backward transport ([`dynamics`]),
//! - history families, chain kets, consistency and extended Born-rule
//!   probabilities ([`histories`]),
//! - weak values and presence verdicts from a forward and a backward state
//!   ([`weak`]),
//! - qubit-probe weak measurements with branch decomposition and sampling
//!   ([`probes`]),
//! - the nested Mach-Zehnder interferometer and its named families ([`mzi`]).

pub mod dynamics;
pub mod error;
pub mod histories;
pub mod mzi;
pub mod probes;
pub mod statespace;
pub mod weak;

pub use dynamics::{Dynamics, StepReport, StepUnitary};
pub use error::{Error, Result};
pub use histories::{
    born_probabilities, chain_ket, conditional_probability, consistency_check, family_chain_kets,
    infer, refine, ConsistencyReport, Family, History, InferenceVerdict, DEFAULT_CONSISTENCY_TOL,
};
pub use mzi::{build_nested_mzi, build_no_bs34, named_family, BeamSplitterParams, NamedFamilyId};
pub use probes::{
    branch_components, coincidence_support, evolve_trajectory, evolve_with_probes,
    outcome_distribution, sample, BranchComponent, CouplingCompletion, JointState, Kappa,
    OutcomeDistribution, ProbeSpec, ProbeStrength, SampleCounts,
};
pub use statespace::{
    pdi_validate, ChannelLabel, Ket, Operator, Pdi, PdiReport, Projector, SliceRef, TimeSlice, C64,
    DEFAULT_TOL,
};
pub use weak::{
    backward_state, chain_weak_identity_check, presence_table, weak_value, PresenceRow,
    PresenceVerdict, TwoStateVector,
};
