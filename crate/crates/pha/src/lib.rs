//! Probabilistic Horn abduction.
//!
//! A knowledge base pairs definite Horn clauses with *assumable* atoms that
//! carry prior probabilities. An explanation of a ground query is a minimal
//! set of assumable instances that proves it and is consistent with the
//! integrity constraints (`false <- ...` clauses); under the standard
//! modelling assumptions — independent hypotheses, and exclusive, covering
//! alternatives — the probability of the query is the sum of its
//! explanations' priors, and posteriors are ratios of such sums.
//!
//! The pieces:
//!
//! * [`kb`] — the `.pha` language: parser, printer, validation, and the
//!   [`kb::KnowledgeBase`] index the engine runs against.
//! * [`engine`] — best-first search over partial explanations with anytime
//!   lower/upper bounds on the query mass.
//! * [`probability`] — query mass, posteriors, and posterior distributions.
//! * [`bn`] — Bayesian networks (JSON) and their compilation into the
//!   abduction language.
//! * [`oracle`] — brute-force reference implementations used to cross-check
//!   the engine; also backs `pha check`.
//! * [`prob`] — the scalar abstraction: plain `f64`/`f32`, or [`LogProb`]
//!   for log-space products on deep networks.
//! * [`netgen`] — seeded random networks and programs for testing.
//!
//! Everything numeric is generic over [`Probability`]; the `Std*` aliases
//! fix the scalar to `f64` for ordinary use.

pub mod bn;
pub mod engine;
pub mod kb;
pub mod netgen;
pub mod oracle;
pub mod prob;
pub mod probability;
pub mod terms;

pub use bn::{BayesianNetwork, CompileOptions, CompiledNetwork, DomainsFile};
pub use engine::{
    EngineError, Explanation, GoalKind, MassGap, Nogood, PartialExplanation, SearchOptions,
    SearchReport, SearchState, StepOutcome, StopCriteria, TerminationReason,
};
pub use kb::{Diagnostic, KnowledgeBase, Program, Severity};
pub use prob::{LogProb, Probability, TIE_TOLERANCE};
pub use probability::{
    distribution, explanation_prior, mass, posterior, DistributionResult, InferenceError,
    MassResult, PosteriorResult,
};
pub use terms::{Atom, Substitution, Term};

/// `f64` specializations for the common case.
pub type StdProgram = kb::Program<f64>;
pub type StdKnowledgeBase = kb::KnowledgeBase<f64>;
pub type StdSearchState = engine::SearchState<f64>;
pub type StdSearchReport = engine::SearchReport<f64>;
pub type StdExplanation = engine::Explanation<f64>;
pub type StdMassResult = probability::MassResult<f64>;
pub type StdPosteriorResult = probability::PosteriorResult<f64>;
pub type StdDistributionResult = probability::DistributionResult<f64>;
