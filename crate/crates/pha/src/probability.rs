//! Query-level probabilities on top of the explanation search.
//!
//! The mass of a ground conjunction is the prior sum of its minimal
//! consistent explanations; posteriors are mass ratios. When a search stops
//! early the queue residue gives anytime bounds, and ratios of bounds give
//! posterior intervals.

use std::collections::BTreeSet;

use crate::engine::{
    EngineError, Explanation, SearchOptions, SearchState, StopCriteria, TerminationReason,
};
use crate::kb::{KnowledgeBase, MatchError};
use crate::prob::Probability;
use crate::terms::{Atom, Term};

#[derive(Clone, Debug, thiserror::Error)]
pub enum InferenceError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("the observations have zero probability, so the posterior is undefined")]
    UndefinedPosterior,
    #[error("{0} does not match any assumable template")]
    UnknownHypothesis(Atom),
}

impl From<MatchError> for InferenceError {
    fn from(e: MatchError) -> Self {
        InferenceError::Engine(e.into())
    }
}

/// Mass of a ground conjunction with anytime bounds.
#[derive(Clone, Debug)]
pub struct MassResult<P> {
    /// The queried conjunction, duplicates removed.
    pub query: Vec<Atom>,
    /// Prior sum of the explanations found so far.
    pub lower: P,
    /// `lower` plus everything the unexplored queue could still contribute.
    pub upper: P,
    /// True when the search exhausted: `lower == upper` is the exact mass.
    pub exact: bool,
    /// Minimal consistent explanations, in emission (best-first) order.
    pub explanations: Vec<Explanation<P>>,
    pub termination: TerminationReason,
    pub expansions: u64,
    /// Duplicate hypothesis sets were proved along distinct paths; the
    /// mass sum may overcount if the program's rules are not disjoint.
    pub disjointness_warning: bool,
}

impl<P: Probability> MassResult<P> {
    /// Point answer: the lower bound, which is the exact mass whenever the
    /// search exhausted.
    pub fn value(&self) -> P {
        self.lower
    }
}

pub fn mass<P: Probability>(
    kb: &KnowledgeBase<P>,
    query: &[Atom],
    stop: &StopCriteria,
) -> Result<MassResult<P>, InferenceError> {
    mass_with_options(kb, query, stop, SearchOptions::default())
}

pub fn mass_with_options<P: Probability>(
    kb: &KnowledgeBase<P>,
    query: &[Atom],
    stop: &StopCriteria,
    options: SearchOptions,
) -> Result<MassResult<P>, InferenceError> {
    // Repeated atoms are idempotent in a conjunction; keep first occurrences.
    let mut seen = BTreeSet::new();
    let query: Vec<Atom> = query
        .iter()
        .filter(|a| seen.insert((*a).clone()))
        .cloned()
        .collect();

    let mut search = SearchState::new(kb, query.clone(), options)?;
    let report = search.run_report(kb, stop)?;
    let exact = report.termination == TerminationReason::Exhausted;
    Ok(MassResult {
        query,
        lower: report.lower,
        upper: if exact { report.lower } else { report.upper },
        exact,
        explanations: report.explanations,
        termination: report.termination,
        expansions: report.expansions,
        disjointness_warning: report.disjointness_warning,
    })
}

/// Posterior of a single ground atom given ground observations.
#[derive(Clone, Debug)]
pub struct PosteriorResult<P> {
    pub target: Atom,
    pub observations: Vec<Atom>,
    pub lower: P,
    pub upper: P,
    /// Both searches exhausted: `lower == upper` is the exact posterior.
    pub exact: bool,
    pub numerator: MassResult<P>,
    pub denominator: MassResult<P>,
}

/// `P(target | observations)` as the ratio of two masses.
pub fn posterior<P: Probability>(
    kb: &KnowledgeBase<P>,
    target: &Atom,
    observations: &[Atom],
    stop: &StopCriteria,
) -> Result<PosteriorResult<P>, InferenceError> {
    let denominator = mass(kb, observations, stop)?;
    if denominator.upper.is_zero() {
        return Err(InferenceError::UndefinedPosterior);
    }
    let mut conjunction = observations.to_vec();
    conjunction.push(target.clone());
    let numerator = mass(kb, &conjunction, stop)?;

    let exact = numerator.exact && denominator.exact;
    let (lower, upper) = ratio_interval(&numerator, &denominator, exact);
    Ok(PosteriorResult {
        target: target.clone(),
        observations: observations.to_vec(),
        lower,
        upper,
        exact,
        numerator,
        denominator,
    })
}

/// Bound the ratio `M(num)/M(den)` from the two mass intervals. The callers
/// have already rejected a zero denominator upper bound.
fn ratio_interval<P: Probability>(
    numerator: &MassResult<P>,
    denominator: &MassResult<P>,
    exact: bool,
) -> (P, P) {
    if exact {
        let point = (numerator.lower / denominator.lower).clamp_unit();
        return (point, point);
    }
    let lower = if denominator.upper.is_zero() {
        P::zero()
    } else {
        (numerator.lower / denominator.upper).clamp_unit()
    };
    let upper = if denominator.lower.is_zero() {
        P::one()
    } else {
        (numerator.upper / denominator.lower).clamp_unit()
    };
    (lower, upper)
}

#[derive(Clone, Debug)]
pub struct DistributionEntry<P> {
    pub value: String,
    pub lower: P,
    pub upper: P,
    pub exact: bool,
}

/// Posterior over every value of one variable, sharing a single
/// denominator search.
#[derive(Clone, Debug)]
pub struct DistributionResult<P> {
    pub variable: String,
    pub observations: Vec<Atom>,
    pub entries: Vec<DistributionEntry<P>>,
    pub denominator: MassResult<P>,
}

pub fn distribution<P: Probability>(
    kb: &KnowledgeBase<P>,
    variable: &str,
    values: &[String],
    observations: &[Atom],
    stop: &StopCriteria,
) -> Result<DistributionResult<P>, InferenceError> {
    let denominator = mass(kb, observations, stop)?;
    if denominator.upper.is_zero() {
        return Err(InferenceError::UndefinedPosterior);
    }
    let mut entries = Vec::with_capacity(values.len());
    for value in values {
        let target = Atom::new(variable, vec![Term::constant(value)]);
        let mut conjunction = observations.to_vec();
        conjunction.push(target);
        let numerator = mass(kb, &conjunction, stop)?;
        let exact = numerator.exact && denominator.exact;
        let (lower, upper) = ratio_interval(&numerator, &denominator, exact);
        entries.push(DistributionEntry {
            value: value.clone(),
            lower,
            upper,
            exact,
        });
    }
    Ok(DistributionResult {
        variable: variable.to_string(),
        observations: observations.to_vec(),
        entries,
        denominator,
    })
}

/// Product of the hypothesis priors: the prior probability of a set of
/// independent assumptions. The empty set has prior 1.
pub fn explanation_prior<P: Probability>(
    kb: &KnowledgeBase<P>,
    hypotheses: &BTreeSet<Atom>,
) -> Result<P, InferenceError> {
    let mut prior = P::one();
    for atom in hypotheses {
        match kb.assumable_match(atom)? {
            Some((instance, p)) if instance == *atom => prior = prior * p,
            _ => return Err(InferenceError::UnknownHypothesis(atom.clone())),
        }
    }
    Ok(prior)
}
