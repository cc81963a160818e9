//! Exact desk-scale simulator for pre- and post-selected quantum systems.
//!
//! The crate models small multipartite systems with dense complex linear
//! algebra and answers the questions that make pre/post-selected ensembles
//! interesting:
//!
//! - [`hilbert`] — layouts, kets, operators, tensor products, lifting.
//! - [`measurement`] — labeled projector decompositions, Born statistics,
//!   collapse, forced measurement chains.
//! - [`frames`] — measurement orderings as reference frames; comparison of
//!   the collapse stories different orderings tell.
//! - [`tsvf`] — conditional (two-boundary) probabilities, elements of
//!   reality, and the and-rule / product-rule failure checks.
//! - [`weak`] — weak values, exact post-selected pointer densities, seeded
//!   Monte Carlo pointer sampling, disturbance fidelity.
//! - [`scenarios`] — built-in gedanken experiments and the JSON scenario
//!   format.
//!
//! Numerics are plain `f64`; every tolerance is explicit. The crate-wide
//! algebraic default is [`hilbert::DEFAULT_EPS`]; certainty detection uses
//! the looser [`tsvf::DEFAULT_CERTAINTY_TOLERANCE`].

pub mod error;
pub mod exec;
pub mod frames;
pub mod hilbert;
pub mod measurement;
pub mod scenarios;
pub mod tsvf;
pub mod weak;

pub use error::{Error, Result};
pub use frames::{
    compare_orderings, run_ordering, AssignmentDistribution, MeasurementEvent, Ordering,
    OrderingComparison, OrderingRun, PrefixOverlap, TaggedState,
};
pub use hilbert::{
    apply, expectation, inner_product, lift_to_subsystem, projector_onto, tensor_kets, Ket,
    Operator, SubsystemLayout, DEFAULT_EPS,
};
pub use measurement::{
    born_distribution, collapse, measure_sequence, validate_observable, Branch, MeasurementRecord,
    Observable, OutcomeDistribution, PauliAxis, ValidationReport,
};
pub use scenarios::{
    builtin, builtin_hardy_spins, builtin_names, builtin_three_box, load_scenario_str,
    parse_operator_spec, semantically_equal, validate_document, AnalysisRequest, Scenario,
    ScenarioDocument,
};
pub use tsvf::{
    abl_distribution, and_rule_check, element_of_reality, joint_observable, product_observable,
    product_rule_check, AblDistribution, ElementOfReality, RuleCheckReport, TwoStateVector,
    DEFAULT_CERTAINTY_TOLERANCE,
};
pub use weak::{
    disturbance_fidelity, pointer_density, sample_pointer, sample_pointer_seq, weak_value,
    PointerDensity, WeakMeasurementConfig, WeakRunReport,
};
