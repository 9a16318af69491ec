//! Exhaustive reference computations used to cross-check the search engine.
//!
//! Everything here is deliberately brute force and independent: network
//! queries enumerate complete joint assignments, and explanation enumeration
//! tests candidate hypothesis sets against a ground forward-chaining prover.
//! No code is shared with the engine beyond the term types, so agreement
//! between the two is meaningful evidence of correctness.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::bn::BayesianNetwork;
use crate::kb::KnowledgeBase;
use crate::prob::Probability;
use crate::terms::{Atom, Term};

/// Variable-name to value-name map; partial or total per context.
pub type Assignment = BTreeMap<String, String>;

#[derive(Clone, Debug, thiserror::Error)]
pub enum OracleError {
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("'{value}' is not a value of variable '{variable}'")]
    UnknownValue { variable: String, value: String },
    #[error("assignment must cover every variable; '{0}' is missing")]
    IncompleteAssignment(String),
    #[error("observation has probability zero")]
    ZeroProbabilityObservation,
    #[error("grounding too large ({0} instances)")]
    GroundingTooLarge(u64),
    #[error("hypothesis {0} does not denote a network variable value")]
    ForeignHypothesis(Atom),
    #[error("hypotheses assign conflicting values to variable '{0}'")]
    ConflictingHypotheses(String),
}

fn validate_assignment(bn: &BayesianNetwork, a: &Assignment) -> Result<(), OracleError> {
    for (var, val) in a {
        let Some(v) = bn.variable(var) else {
            return Err(OracleError::UnknownVariable(var.clone()));
        };
        if v.value_index(val).is_none() {
            return Err(OracleError::UnknownValue {
                variable: var.clone(),
                value: val.clone(),
            });
        }
    }
    Ok(())
}

/// Probability of one complete world: the product of CPT entries.
pub fn joint_probability(bn: &BayesianNetwork, world: &Assignment) -> Result<f64, OracleError> {
    validate_assignment(bn, world)?;
    let mut p = 1.0;
    for var in bn.variables() {
        let value = world
            .get(&var.name)
            .ok_or_else(|| OracleError::IncompleteAssignment(var.name.clone()))?;
        let given: Vec<String> = var
            .parents
            .iter()
            .map(|&pi| world[&bn.variables()[pi].name].clone())
            .collect();
        let row = var.row_for(&given).expect("validated CPT is total");
        p *= row.probabilities[var.value_index(value).expect("validated value")];
    }
    Ok(p)
}

/// Marginal probability of a partial assignment: the sum of `joint_probability`
/// over all of its completions.
pub fn marginal(bn: &BayesianNetwork, partial: &Assignment) -> Result<f64, OracleError> {
    validate_assignment(bn, partial)?;
    let free: Vec<&str> = bn
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .filter(|n| !partial.contains_key(*n))
        .collect();
    let mut total = 0.0;
    let mut world = partial.clone();
    for completion in value_odometer(bn, &free) {
        for (name, value) in free.iter().zip(completion) {
            world.insert((*name).to_string(), value);
        }
        total += joint_probability(bn, &world)?;
    }
    Ok(total)
}

/// Exact conditional `P(variable = value | obs)` by enumeration.
pub fn posterior_exact(
    bn: &BayesianNetwork,
    variable: &str,
    value: &str,
    obs: &Assignment,
) -> Result<f64, OracleError> {
    let mut target = Assignment::new();
    target.insert(variable.to_string(), value.to_string());
    validate_assignment(bn, &target)?;
    let denominator = marginal(bn, obs)?;
    if denominator == 0.0 {
        return Err(OracleError::ZeroProbabilityObservation);
    }
    let mut conj = obs.clone();
    match conj.insert(variable.to_string(), value.to_string()) {
        Some(prev) if prev != value => return Ok(0.0),
        _ => {}
    }
    Ok(marginal(bn, &conj)? / denominator)
}

/// All assignments of `names` (each yielded as a value vector parallel to
/// `names`), in row-major order of the variables' value lists.
fn value_odometer<'a>(
    bn: &'a BayesianNetwork,
    names: &'a [&'a str],
) -> impl Iterator<Item = Vec<String>> + 'a {
    let domains: Vec<&[String]> = names
        .iter()
        .map(|n| bn.variable(n).expect("validated name").values.as_slice())
        .collect();
    let total: usize = domains.iter().map(|d| d.len()).product();
    (0..total).map(move |mut ix| {
        let mut out = vec![String::new(); domains.len()];
        for (slot, d) in domains.iter().enumerate().rev() {
            out[slot] = d[ix % d.len()].clone();
            ix /= d.len();
        }
        out
    })
}

/// Read a compiled-network explanation back as the world it describes:
/// `x(v)` and `c_x(v, ...)` both pin variable `x` to value `v`.
pub fn explanation_assignment(
    bn: &BayesianNetwork,
    hypotheses: &BTreeSet<Atom>,
) -> Result<Assignment, OracleError> {
    let mut world = Assignment::new();
    for h in hypotheses {
        if bn.variable(&h.predicate).is_some() && h.arity() == 1 {
            // Root-shaped hypothesis: x(v) pins x = v.
            let value = constant_arg(h, 0)?;
            pin(bn, &mut world, &h.predicate, value)?;
            continue;
        }
        let Some(variable) = h
            .predicate
            .strip_prefix("c_")
            .and_then(|name| bn.variable(name).map(|v| (name, v)))
        else {
            return Err(OracleError::ForeignHypothesis(h.clone()));
        };
        let (name, var) = variable;
        // c_x(v, p1, ..., pm) pins x = v and each parent to its given value.
        if h.arity() != 1 + var.parents.len() {
            return Err(OracleError::ForeignHypothesis(h.clone()));
        }
        let value = constant_arg(h, 0)?;
        pin(bn, &mut world, name, value)?;
        for (i, &parent) in var.parents.iter().enumerate() {
            let parent_name = bn.variables()[parent].name.clone();
            let parent_value = constant_arg(h, i + 1)?;
            pin(bn, &mut world, &parent_name, parent_value)?;
        }
    }
    Ok(world)
}

/// Record `variable = value`, rejecting unknown values and clashes with an
/// earlier pin.
fn pin(
    bn: &BayesianNetwork,
    world: &mut Assignment,
    variable: &str,
    value: String,
) -> Result<(), OracleError> {
    if bn
        .variable(variable)
        .is_none_or(|v| v.value_index(&value).is_none())
    {
        return Err(OracleError::UnknownValue {
            variable: variable.to_string(),
            value,
        });
    }
    match world.get(variable) {
        Some(prev) if *prev != value => {
            Err(OracleError::ConflictingHypotheses(variable.to_string()))
        }
        Some(_) => Ok(()),
        None => {
            world.insert(variable.to_string(), value);
            Ok(())
        }
    }
}

fn constant_arg(h: &Atom, index: usize) -> Result<String, OracleError> {
    match h.args.get(index) {
        Some(Term::Constant(c)) => Ok(c.clone()),
        _ => Err(OracleError::ForeignHypothesis(h.clone())),
    }
}

// --- explanation enumeration over arbitrary KBs -----------------------------

/// A KB instantiated over its constant universe, for forward chaining.
pub struct GroundKb {
    /// `(head, body)` pairs; constraints keep their `false` head.
    rules: Vec<(Atom, Vec<Atom>)>,
}

const MAX_GROUND_INSTANCES: u64 = 200_000;

impl GroundKb {
    /// Ground every clause over the constants appearing in the KB and
    /// `extra_constants`. Variables range over constants only (compound-term
    /// construction is out of scope for the oracle; the KBs under test are
    /// function-free).
    pub fn new<P: Probability>(
        kb: &KnowledgeBase<P>,
        extra_constants: &[String],
    ) -> Result<GroundKb, OracleError> {
        let mut constants: BTreeSet<String> = extra_constants.iter().cloned().collect();
        for clause in kb.all_clauses() {
            collect_constants_atom(&clause.head, &mut constants);
            for b in &clause.body {
                collect_constants_atom(b, &mut constants);
            }
        }
        for a in kb.assumables() {
            collect_constants_atom(&a.template, &mut constants);
        }
        let constants: Vec<String> = constants.into_iter().collect();

        let mut rules = Vec::new();
        for clause in kb.all_clauses() {
            let mut vars = BTreeSet::new();
            clause.collect_vars(&mut vars);
            let vars: Vec<&str> = vars.into_iter().collect();
            check_grounding_size(constants.len(), vars.len())?;
            for combo in constant_odometer(&constants, vars.len()) {
                let binding: HashMap<&str, &str> = vars.iter().copied().zip(combo).collect();
                rules.push((
                    ground_atom(&clause.head, &binding),
                    clause.body.iter().map(|b| ground_atom(b, &binding)).collect(),
                ));
            }
        }
        Ok(GroundKb { rules })
    }

    /// Least fixpoint of the rules over `facts`.
    pub fn closure(&self, facts: &BTreeSet<Atom>) -> HashSet<Atom> {
        let mut known: HashSet<Atom> = facts.iter().cloned().collect();
        loop {
            let mut changed = false;
            for (head, body) in &self.rules {
                if !known.contains(head) && body.iter().all(|b| known.contains(b)) {
                    known.insert(head.clone());
                    changed = true;
                }
            }
            if !changed {
                return known;
            }
        }
    }

    /// Does `hypotheses` prove every goal atom without deriving `false`?
    pub fn explains(&self, hypotheses: &BTreeSet<Atom>, goal: &[Atom]) -> bool {
        let closure = self.closure(hypotheses);
        !closure.contains(&Atom::falsum()) && goal.iter().all(|g| closure.contains(g))
    }

    /// Does `hypotheses` derive `false`?
    pub fn inconsistent(&self, hypotheses: &BTreeSet<Atom>) -> bool {
        self.closure(hypotheses).contains(&Atom::falsum())
    }
}

fn check_grounding_size(constants: usize, vars: usize) -> Result<(), OracleError> {
    let mut total: u64 = 1;
    for _ in 0..vars {
        total = total.saturating_mul(constants.max(1) as u64);
        if total > MAX_GROUND_INSTANCES {
            return Err(OracleError::GroundingTooLarge(total));
        }
    }
    Ok(())
}

fn constant_odometer<'a>(
    constants: &'a [String],
    slots: usize,
) -> impl Iterator<Item = Vec<&'a str>> + 'a {
    let total: usize = constants.len().pow(slots as u32).max(usize::from(slots == 0));
    (0..total).map(move |mut ix| {
        let mut out = Vec::with_capacity(slots);
        for _ in 0..slots {
            out.push(constants[ix % constants.len()].as_str());
            ix /= constants.len();
        }
        out
    })
}

fn collect_constants_atom(atom: &Atom, out: &mut BTreeSet<String>) {
    for t in &atom.args {
        collect_constants_term(t, out);
    }
}

fn collect_constants_term(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Variable(_) => {}
        Term::Constant(c) => {
            out.insert(c.clone());
        }
        Term::Compound(_, args) => {
            for a in args {
                collect_constants_term(a, out);
            }
        }
    }
}

fn ground_atom(atom: &Atom, binding: &HashMap<&str, &str>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|t| ground_term(t, binding)).collect(),
    }
}

fn ground_term(t: &Term, binding: &HashMap<&str, &str>) -> Term {
    match t {
        Term::Variable(v) => Term::Constant(binding[v.as_str()].to_string()),
        Term::Constant(_) => t.clone(),
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| ground_term(a, binding)).collect(),
        ),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumeratedExplanation<P> {
    pub hypotheses: BTreeSet<Atom>,
    pub prior: P,
}

#[derive(Clone, Debug)]
pub struct Enumeration<P> {
    pub explanations: Vec<EnumeratedExplanation<P>>,
    /// True when no candidate set was skipped for size, i.e. the result is
    /// provably complete rather than complete-up-to-`max_size`.
    pub exhaustive: bool,
}

/// Enumerate every minimal consistent hypothesis set proving `goal`, by
/// brute-force search over subsets of the ground hypothesis universe, smallest
/// sets first, up to `max_size` hypotheses per set.
pub fn enumerate_explanations<P: Probability>(
    kb: &KnowledgeBase<P>,
    goal: &[Atom],
    max_size: usize,
) -> Result<Enumeration<P>, OracleError> {
    let mut goal_constants = BTreeSet::new();
    for g in goal {
        collect_constants_atom(g, &mut goal_constants);
    }
    let goal_constants: Vec<String> = goal_constants.into_iter().collect();
    let ground = GroundKb::new(kb, &goal_constants)?;

    // Ground hypothesis universe: every instance of every template.
    let mut kb_constants: BTreeSet<String> = goal_constants.iter().cloned().collect();
    for clause in kb.all_clauses() {
        collect_constants_atom(&clause.head, &mut kb_constants);
        for b in &clause.body {
            collect_constants_atom(b, &mut kb_constants);
        }
    }
    for a in kb.assumables() {
        collect_constants_atom(&a.template, &mut kb_constants);
    }
    let constants: Vec<String> = kb_constants.into_iter().collect();
    let mut universe: BTreeMap<Atom, P> = BTreeMap::new();
    for a in kb.assumables() {
        let mut vars = BTreeSet::new();
        a.template.collect_vars(&mut vars);
        let vars: Vec<&str> = vars.into_iter().collect();
        check_grounding_size(constants.len(), vars.len())?;
        for combo in constant_odometer(&constants, vars.len()) {
            let binding: HashMap<&str, &str> = vars.iter().copied().zip(combo).collect();
            universe.insert(ground_atom(&a.template, &binding), a.prior);
        }
    }
    let universe: Vec<(Atom, P)> = universe.into_iter().collect();

    let mut found: Vec<EnumeratedExplanation<P>> = Vec::new();
    let empty = BTreeSet::new();
    if ground.explains(&empty, goal) {
        found.push(EnumeratedExplanation {
            hypotheses: empty,
            prior: P::one(),
        });
        // The empty set is a subset of everything; nothing else is minimal.
        return Ok(Enumeration {
            explanations: found,
            exhaustive: true,
        });
    }

    let cap = max_size.min(universe.len());
    let mut combo: Vec<usize> = Vec::new();
    for k in 1..=cap {
        combo.clear();
        combos_of_size(&universe, k, 0, &mut combo, &mut found, &ground, goal);
    }
    Ok(Enumeration {
        explanations: found,
        exhaustive: max_size >= universe.len(),
    })
}

#[allow(clippy::too_many_arguments)]
fn combos_of_size<P: Probability>(
    universe: &[(Atom, P)],
    k: usize,
    start: usize,
    combo: &mut Vec<usize>,
    found: &mut Vec<EnumeratedExplanation<P>>,
    ground: &GroundKb,
    goal: &[Atom],
) {
    if combo.len() == k {
        let set: BTreeSet<Atom> = combo.iter().map(|&i| universe[i].0.clone()).collect();
        if found.iter().any(|f| f.hypotheses.is_subset(&set)) {
            return;
        }
        if ground.explains(&set, goal) {
            let mut prior = P::one();
            for &i in combo.iter() {
                prior = prior * universe[i].1;
            }
            found.push(EnumeratedExplanation {
                hypotheses: set,
                prior,
            });
        }
        return;
    }
    let remaining = k - combo.len();
    for i in start..=(universe.len().saturating_sub(remaining)) {
        combo.push(i);
        combos_of_size(universe, k, i + 1, combo, found, ground, goal);
        combo.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_atom;

    fn smoke_alarm() -> BayesianNetwork {
        BayesianNetwork::parse(include_str!("../../../networks/smoke_alarm.json")).unwrap()
    }

    fn asg(pairs: &[(&str, &str)]) -> Assignment {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn joint_probability_multiplies_cpt_entries() {
        let bn = smoke_alarm();
        let world = asg(&[
            ("fire", "yes"),
            ("tampering", "no"),
            ("smoke", "yes"),
            ("alarm", "yes"),
            ("leaving", "yes"),
            ("report", "yes"),
        ]);
        let p = joint_probability(&bn, &world).unwrap();
        assert!((p - 0.005762988).abs() < 1e-15);
        // Partial assignments are rejected for the joint.
        let partial = asg(&[("fire", "yes")]);
        assert!(matches!(
            joint_probability(&bn, &partial),
            Err(OracleError::IncompleteAssignment(_))
        ));
    }

    #[test]
    fn marginals_sum_joints() {
        let bn = smoke_alarm();
        assert!((marginal(&bn, &asg(&[("smoke", "yes")])).unwrap() - 0.0189).abs() < 1e-15);
        assert!((marginal(&bn, &asg(&[("smoke", "no")])).unwrap() - 0.9811).abs() < 1e-15);
        assert!((marginal(&bn, &asg(&[("fire", "yes")])).unwrap() - 0.01).abs() < 1e-15);
        // The empty marginal is the whole distribution.
        assert!((marginal(&bn, &asg(&[])).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            marginal(&bn, &asg(&[("fire", "maybe")])),
            Err(OracleError::UnknownValue { .. })
        ));
        assert!(matches!(
            marginal(&bn, &asg(&[("phoenix", "yes")])),
            Err(OracleError::UnknownVariable(_))
        ));
    }

    #[test]
    fn posterior_normalizes() {
        let bn = smoke_alarm();
        let p = posterior_exact(&bn, "fire", "yes", &asg(&[("smoke", "yes")])).unwrap();
        assert!((p - 0.009 / 0.0189).abs() < 1e-15);
        let q = posterior_exact(&bn, "fire", "no", &asg(&[("smoke", "yes")])).unwrap();
        assert!((p + q - 1.0).abs() < 1e-12);
        // Conditioning on an impossible observation is an error...
        let impossible = asg(&[("fire", "yes"), ("smoke", "maybe")]);
        assert!(posterior_exact(&bn, "fire", "yes", &impossible).is_err());
        // ...and observing the target variable pins the posterior.
        let pinned = posterior_exact(&bn, "fire", "yes", &asg(&[("fire", "no")])).unwrap();
        assert_eq!(pinned, 0.0);
    }

    #[test]
    fn explanations_of_smoke_enumerate_fire_cases() {
        let kb: KnowledgeBase<f64> = {
            let bn = smoke_alarm();
            let compiled = bn.compile(&Default::default());
            KnowledgeBase::build(&compiled.program).unwrap()
        };
        let goal = vec![parse_atom("smoke(yes)").unwrap()];
        let e = enumerate_explanations(&kb, &goal, 2).unwrap();
        assert_eq!(e.explanations.len(), 2);
        let mut priors: Vec<f64> = e.explanations.iter().map(|x| x.prior).collect();
        priors.sort_by(f64::total_cmp);
        assert!((priors[0] - 0.009).abs() < 1e-15); // fire(yes) * c_smoke(yes,yes)
        assert!((priors[1] - 0.0099).abs() < 1e-15); // fire(no) * c_smoke(yes,no)
        assert!(!e.exhaustive); // capped below the universe size
    }

    #[test]
    fn contradictory_goal_has_no_explanations() {
        let kb: KnowledgeBase<f64> =
            KnowledgeBase::parse("assumable( a, 0.5 ).\nassumable( b, 0.5 ).\nfalse <- a, b.\ng <- a, b.")
                .unwrap();
        let goal = vec![parse_atom("g").unwrap()];
        let e = enumerate_explanations(&kb, &goal, 5).unwrap();
        assert!(e.explanations.is_empty());
        assert!(e.exhaustive);
    }

    #[test]
    fn empty_goal_is_explained_by_nothing() {
        let kb: KnowledgeBase<f64> = KnowledgeBase::parse("assumable( a, 0.5 ).").unwrap();
        let e = enumerate_explanations(&kb, &[], 3).unwrap();
        assert_eq!(e.explanations.len(), 1);
        assert!(e.explanations[0].hypotheses.is_empty());
        assert_eq!(e.explanations[0].prior, 1.0);
    }

    #[test]
    fn minimality_skips_supersets() {
        let kb: KnowledgeBase<f64> = KnowledgeBase::parse(
            "assumable( a, 0.5 ).\nassumable( b, 0.5 ).\ng <- a.\ng <- a, b.",
        )
        .unwrap();
        let e = enumerate_explanations(&kb, &[parse_atom("g").unwrap()], 2).unwrap();
        assert_eq!(e.explanations.len(), 1);
        assert_eq!(
            e.explanations[0].hypotheses,
            BTreeSet::from([parse_atom("a").unwrap()])
        );
    }

    #[test]
    fn open_templates_ground_over_the_universe() {
        let kb: KnowledgeBase<f64> =
            KnowledgeBase::parse("assumable( h(X), 0.5 ).\ng <- h(a), h(b).").unwrap();
        let e = enumerate_explanations(&kb, &[parse_atom("g").unwrap()], 3).unwrap();
        assert_eq!(e.explanations.len(), 1);
        assert_eq!(e.explanations[0].prior, 0.25);
        assert_eq!(e.explanations[0].hypotheses.len(), 2);
    }

    #[test]
    fn explanation_assignment_reads_both_atom_shapes() {
        let bn = smoke_alarm();
        let hyps: BTreeSet<Atom> = [
            parse_atom("fire(yes)").unwrap(),
            parse_atom("c_smoke(yes, yes)").unwrap(),
        ]
        .into();
        let world = explanation_assignment(&bn, &hyps).unwrap();
        assert_eq!(world, asg(&[("fire", "yes"), ("smoke", "yes")]));
        let clash: BTreeSet<Atom> = [
            parse_atom("fire(yes)").unwrap(),
            parse_atom("c_smoke(yes, no)").unwrap(),
        ]
        .into();
        assert!(matches!(
            explanation_assignment(&bn, &clash),
            Err(OracleError::ConflictingHypotheses(_))
        ));
        let foreign: BTreeSet<Atom> = [parse_atom("meteor(yes)").unwrap()].into();
        assert!(matches!(
            explanation_assignment(&bn, &foreign),
            Err(OracleError::ForeignHypothesis(_))
        ));
    }
}
