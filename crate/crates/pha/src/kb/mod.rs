//! The rule language and its knowledge bases.
//!
//! A program is a list of statements: definite clauses `h <- b1, ..., bn.`,
//! facts `h.`, integrity constraints `false <- b1, ..., bn.`, and assumable
//! declarations `assumable( template, prior ).`. [`KnowledgeBase::build`]
//! validates a parsed [`Program`] and indexes it for the search engine.

mod lexer;
mod parser;
mod printer;

pub use parser::{parse_atom, parse_program, parse_program_located, parse_query};
pub use printer::program_to_string;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::prob::Probability;
use crate::terms::{fresh_index, unify_atoms, Atom, FreshVars, Substitution, Term, FALSE};

/// Reserved statement keyword; not usable as a predicate.
pub const ASSUMABLE_KEYWORD: &str = "assumable";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn fact(head: Atom) -> Clause {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_falsum()
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        self.head.collect_vars(out);
        for b in &self.body {
            b.collect_vars(out);
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " <- " } else { ", " }, b)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assumable<P> {
    pub template: Atom,
    pub prior: P,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement<P> {
    Clause(Clause),
    Assumable(Assumable<P>),
}

/// A parsed program: the syntactic artifact, before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program<P> {
    pub statements: Vec<Statement<P>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A structured parse or validation finding.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable machine-readable slug, e.g. `kb/prior-out-of-range`.
    pub code: &'static str,
    pub message: String,
    pub line: Option<u32>,
    pub col: Option<u32>,
}

impl Diagnostic {
    pub fn at(severity: Severity, code: &'static str, message: String, pos: Position) -> Self {
        Diagnostic {
            severity,
            code,
            message,
            line: Some(pos.line),
            col: Some(pos.col),
        }
    }

    pub fn global(severity: Severity, code: &'static str, message: String) -> Self {
        Diagnostic {
            severity,
            code,
            message,
            line: None,
            col: None,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]", self.code)?;
        if let (Some(line), Some(col)) = (self.line, self.col) {
            write!(f, " {line}:{col}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// A successful match of a goal against an assumable template.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumableMatch<P> {
    /// Unifier of the goal with the (renamed-apart) template.
    pub unifier: Substitution,
    /// The ground hypothesis instance to assume.
    pub instance: Atom,
    pub prior: P,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum MatchError {
    #[error("cannot assume non-ground atom {goal} (template {template})")]
    NonGroundAssumption { goal: Atom, template: Atom },
    #[error("goal {goal} unifies with more than one assumable template")]
    AmbiguousMatch { goal: Atom },
}

/// A validated, indexed program.
#[derive(Clone, Debug)]
pub struct KnowledgeBase<P> {
    rules: HashMap<(String, usize), Vec<Clause>>,
    constraints: Vec<Clause>,
    assumables: Vec<Assumable<P>>,
    warnings: Vec<Diagnostic>,
    fresh_floor: u64,
}

impl<P: Probability> KnowledgeBase<P> {
    /// Parse and build in one step.
    pub fn parse(src: &str) -> Result<Self, Vec<Diagnostic>> {
        let (program, positions) = parse_program_located::<P>(src)?;
        Self::build_located(&program, Some(&positions))
    }

    pub fn build(program: &Program<P>) -> Result<Self, Vec<Diagnostic>> {
        Self::build_located(program, None)
    }

    /// Validate and index `program`. `positions`, when given, must align with
    /// `program.statements` and is used to attach source locations to
    /// diagnostics. Returns every diagnostic (errors and warnings) on failure.
    pub fn build_located(
        program: &Program<P>,
        positions: Option<&[Position]>,
    ) -> Result<Self, Vec<Diagnostic>> {
        let mut diags: Vec<Diagnostic> = Vec::new();
        let pos_of = |idx: usize| positions.and_then(|ps| ps.get(idx)).copied();
        let mut report = |severity, code, message: String, idx: usize| {
            let d = match pos_of(idx) {
                Some(p) => Diagnostic::at(severity, code, message, p),
                None => Diagnostic::global(
                    severity,
                    code,
                    format!("statement {}: {message}", idx + 1),
                ),
            };
            diags.push(d);
        };

        let mut rules: HashMap<(String, usize), Vec<Clause>> = HashMap::new();
        let mut constraints: Vec<Clause> = Vec::new();
        let mut assumables: Vec<Assumable<P>> = Vec::new();
        let mut assumable_indices: Vec<usize> = Vec::new();
        let mut seen_clauses: HashSet<Clause> = HashSet::new();
        let mut seen_templates: Vec<(Atom, P, usize)> = Vec::new();
        let mut fresh_floor: u64 = 0;

        for (idx, stmt) in program.statements.iter().enumerate() {
            let mut vars = BTreeSet::new();
            match stmt {
                Statement::Clause(clause) => {
                    clause.collect_vars(&mut vars);
                    let mut ok = true;
                    if clause.head.predicate == FALSE && !clause.head.args.is_empty() {
                        report(
                            Severity::Error,
                            "kb/false-arity",
                            format!("'{FALSE}' must be nullary, found {}", clause.head),
                            idx,
                        );
                        ok = false;
                    }
                    if clause.head.predicate == ASSUMABLE_KEYWORD {
                        report(
                            Severity::Error,
                            "kb/reserved-predicate",
                            format!("'{ASSUMABLE_KEYWORD}' is reserved and cannot head a clause"),
                            idx,
                        );
                        ok = false;
                    }
                    for b in &clause.body {
                        if b.predicate == FALSE {
                            report(
                                Severity::Error,
                                "kb/false-in-body",
                                format!("'{FALSE}' cannot appear in a clause body: {clause}"),
                                idx,
                            );
                            ok = false;
                        }
                        if b.predicate == ASSUMABLE_KEYWORD {
                            report(
                                Severity::Error,
                                "kb/reserved-predicate",
                                format!("'{ASSUMABLE_KEYWORD}' is reserved and cannot appear in a body"),
                                idx,
                            );
                            ok = false;
                        }
                    }
                    if !ok {
                        continue;
                    }
                    if !seen_clauses.insert(canonical_clause(clause)) {
                        report(
                            Severity::Warning,
                            "kb/duplicate-clause",
                            format!("duplicate clause dropped: {clause}"),
                            idx,
                        );
                        continue;
                    }
                    if clause.is_constraint() {
                        if clause.body.is_empty() {
                            report(
                                Severity::Warning,
                                "kb/unconditional-inconsistency",
                                format!("'{FALSE}.' makes every theory inconsistent"),
                                idx,
                            );
                        }
                        constraints.push(clause.clone());
                    } else {
                        rules
                            .entry((clause.head.predicate.clone(), clause.head.arity()))
                            .or_default()
                            .push(clause.clone());
                    }
                }
                Statement::Assumable(a) => {
                    a.template.collect_vars(&mut vars);
                    let mut ok = true;
                    if a.template.predicate == FALSE || a.template.predicate == ASSUMABLE_KEYWORD {
                        report(
                            Severity::Error,
                            "kb/reserved-predicate",
                            format!("'{}' cannot be declared assumable", a.template.predicate),
                            idx,
                        );
                        ok = false;
                    }
                    if a.prior < P::zero() || a.prior > P::one() {
                        report(
                            Severity::Error,
                            "kb/prior-out-of-range",
                            format!("prior {} for {} is outside [0, 1]", a.prior, a.template),
                            idx,
                        );
                        ok = false;
                    }
                    if !ok {
                        continue;
                    }
                    let canon = canonical_atom(&a.template);
                    if seen_templates
                        .iter()
                        .any(|(t, p, _)| *t == canon && *p == a.prior)
                    {
                        report(
                            Severity::Warning,
                            "kb/duplicate-assumable",
                            format!("duplicate assumable declaration dropped: {}", a.template),
                            idx,
                        );
                        continue;
                    }
                    seen_templates.push((canon, a.prior, idx));
                    assumables.push(a.clone());
                    assumable_indices.push(idx);
                }
            }
            for v in vars {
                if let Some(n) = fresh_index(v) {
                    fresh_floor = fresh_floor.max(n + 1);
                }
            }
        }

        // Distinct assumable templates must not unify: hypotheses sharing a
        // ground instance would make its prior ambiguous.
        let mut fresh = FreshVars::starting_at(fresh_floor);
        for i in 0..assumables.len() {
            for j in (i + 1)..assumables.len() {
                let renamed = rename_atom(&assumables[j].template, &mut fresh);
                if unify_atoms(&assumables[i].template, &renamed).is_some() {
                    report(
                        Severity::Error,
                        "kb/overlapping-assumables",
                        format!(
                            "assumable templates overlap: {} and {}",
                            assumables[i].template, assumables[j].template
                        ),
                        assumable_indices[j],
                    );
                }
            }
        }

        // A rule head unifying with a template would make the hypothesis
        // derivable rather than assumed.
        for (idx, stmt) in program.statements.iter().enumerate() {
            let Statement::Clause(clause) = stmt else {
                continue;
            };
            if clause.is_constraint() {
                continue;
            }
            for a in &assumables {
                let renamed = rename_atom(&a.template, &mut fresh);
                if unify_atoms(&clause.head, &renamed).is_some() {
                    report(
                        Severity::Error,
                        "kb/assumable-head",
                        format!(
                            "head of '{clause}' unifies with assumable template {}",
                            a.template
                        ),
                        idx,
                    );
                }
            }
        }

        if let Some(cycle) = find_cycle(&rules) {
            diags.push(Diagnostic::global(
                Severity::Warning,
                "kb/cyclic-rules",
                format!(
                    "rule dependencies contain a cycle: {}; termination is not guaranteed",
                    cycle.join(" -> ")
                ),
            ));
        }

        if diags.iter().any(Diagnostic::is_error) {
            return Err(diags);
        }
        Ok(KnowledgeBase {
            rules,
            constraints,
            assumables,
            warnings: diags,
            fresh_floor,
        })
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn assumables(&self) -> &[Assumable<P>] {
        &self.assumables
    }

    pub fn constraints(&self) -> &[Clause] {
        &self.constraints
    }

    pub fn rules_for(&self, predicate: &str, arity: usize) -> &[Clause] {
        self.rules
            .get(&(predicate.to_string(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Every stored clause, definite rules first (unordered across
    /// predicates), then constraints.
    pub fn all_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.rules.values().flatten().chain(self.constraints.iter())
    }

    /// A fresh-variable source safe against every name in this KB.
    pub fn fresh_vars(&self) -> FreshVars {
        FreshVars::starting_at(self.fresh_floor)
    }

    /// All rules whose (renamed-apart) head unifies with `goal`, with their
    /// unifiers. For the `false` goal this is the constraint list.
    pub fn matching_rules(&self, goal: &Atom, fresh: &mut FreshVars) -> Vec<(Clause, Substitution)> {
        let candidates: &[Clause] = if goal.is_falsum() {
            &self.constraints
        } else {
            self.rules_for(&goal.predicate, goal.arity())
        };
        let mut out = Vec::new();
        for clause in candidates {
            let renamed = rename_clause(clause, fresh);
            if let Some(theta) = unify_atoms(goal, &renamed.head) {
                out.push((renamed, theta));
            }
        }
        out
    }

    /// All assumable templates unifying with `goal`. Errs if any match has a
    /// non-ground instance: hypotheses must be ground when assumed.
    pub fn assumable_matches(
        &self,
        goal: &Atom,
        fresh: &mut FreshVars,
    ) -> Result<Vec<AssumableMatch<P>>, MatchError> {
        let mut out = Vec::new();
        for a in &self.assumables {
            let renamed = rename_atom(&a.template, fresh);
            let Some(theta) = unify_atoms(goal, &renamed) else {
                continue;
            };
            let instance = theta.apply_atom(&renamed);
            if !instance.is_ground() {
                return Err(MatchError::NonGroundAssumption {
                    goal: goal.clone(),
                    template: a.template.clone(),
                });
            }
            out.push(AssumableMatch {
                unifier: theta,
                instance,
                prior: a.prior,
            });
        }
        Ok(out)
    }

    /// The unique assumable match for `goal`, if any. Templates never overlap,
    /// so a ground goal has at most one; a non-ground goal reaching several is
    /// reported as ambiguous.
    pub fn assumable_match(&self, goal: &Atom) -> Result<Option<(Atom, P)>, MatchError> {
        let mut fresh = self.fresh_vars();
        let mut matches = self.assumable_matches(goal, &mut fresh)?;
        match matches.len() {
            0 => Ok(None),
            1 => {
                let m = matches.pop().expect("len checked");
                Ok(Some((m.instance, m.prior)))
            }
            _ => Err(MatchError::AmbiguousMatch { goal: goal.clone() }),
        }
    }

    /// Reconstruct a program (in index order) from the KB.
    pub fn to_program(&self) -> Program<P> {
        let mut statements: Vec<Statement<P>> = Vec::new();
        let mut keys: Vec<&(String, usize)> = self.rules.keys().collect();
        keys.sort();
        for k in keys {
            for c in &self.rules[k] {
                statements.push(Statement::Clause(c.clone()));
            }
        }
        for c in &self.constraints {
            statements.push(Statement::Clause(c.clone()));
        }
        for a in &self.assumables {
            statements.push(Statement::Assumable(a.clone()));
        }
        Program { statements }
    }
}

fn rename_atom(atom: &Atom, fresh: &mut FreshVars) -> Atom {
    let mut vars = BTreeSet::new();
    atom.collect_vars(&mut vars);
    if vars.is_empty() {
        return atom.clone();
    }
    fresh.renaming(vars.iter().copied()).apply_atom(atom)
}

fn rename_clause(clause: &Clause, fresh: &mut FreshVars) -> Clause {
    let mut vars = BTreeSet::new();
    clause.collect_vars(&mut vars);
    if vars.is_empty() {
        return clause.clone();
    }
    let renaming = fresh.renaming(vars.iter().copied());
    Clause {
        head: renaming.apply_atom(&clause.head),
        body: clause.body.iter().map(|b| renaming.apply_atom(b)).collect(),
    }
}

/// Alpha-rename variables to `_C0, _C1, ...` in first-occurrence order, so
/// structural equality becomes equality modulo renaming.
fn canonical_clause(clause: &Clause) -> Clause {
    let mut map: HashMap<String, String> = HashMap::new();
    Clause {
        head: canonicalize_atom(&clause.head, &mut map),
        body: clause
            .body
            .iter()
            .map(|b| canonicalize_atom(b, &mut map))
            .collect(),
    }
}

fn canonical_atom(atom: &Atom) -> Atom {
    let mut map = HashMap::new();
    canonicalize_atom(atom, &mut map)
}

fn canonicalize_atom(atom: &Atom, map: &mut HashMap<String, String>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|t| canonicalize_term(t, map)).collect(),
    }
}

fn canonicalize_term(t: &Term, map: &mut HashMap<String, String>) -> Term {
    match t {
        Term::Variable(v) => {
            let n = map.len();
            Term::Variable(
                map.entry(v.clone())
                    .or_insert_with(|| format!("_C{n}"))
                    .clone(),
            )
        }
        Term::Constant(_) => t.clone(),
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| canonicalize_term(a, map)).collect(),
        ),
    }
}

/// Depth-first search for a cycle in the predicate dependency graph.
/// Returns one witness path `p -> q -> ... -> p` if found.
fn find_cycle(rules: &HashMap<(String, usize), Vec<Clause>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: HashMap<&(String, usize), Color> =
        rules.keys().map(|k| (k, Color::White)).collect();
    let mut keys: Vec<&(String, usize)> = rules.keys().collect();
    keys.sort();

    fn visit<'a>(
        node: &'a (String, usize),
        rules: &'a HashMap<(String, usize), Vec<Clause>>,
        color: &mut HashMap<&'a (String, usize), Color>,
        stack: &mut Vec<&'a (String, usize)>,
    ) -> Option<Vec<String>> {
        color.insert(node, Color::Gray);
        stack.push(node);
        for clause in &rules[node] {
            for b in &clause.body {
                let key = (b.predicate.clone(), b.arity());
                let Some((dep, _)) = rules.get_key_value(&key) else {
                    continue;
                };
                match color[dep] {
                    Color::Gray => {
                        let start = stack.iter().position(|n| *n == dep).unwrap_or(0);
                        let mut path: Vec<String> = stack[start..]
                            .iter()
                            .map(|(p, a)| format!("{p}/{a}"))
                            .collect();
                        path.push(format!("{}/{}", dep.0, dep.1));
                        return Some(path);
                    }
                    Color::White => {
                        if let Some(c) = visit(dep, rules, color, stack) {
                            return Some(c);
                        }
                    }
                    Color::Black => {}
                }
            }
        }
        stack.pop();
        color.insert(node, Color::Black);
        None
    }

    for k in keys {
        if color[k] == Color::White {
            let mut stack = Vec::new();
            if let Some(c) = visit(k, rules, &mut color, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::Term;

    fn kb(src: &str) -> KnowledgeBase<f64> {
        KnowledgeBase::parse(src).expect("expected valid program")
    }

    fn kb_err(src: &str) -> Vec<Diagnostic> {
        KnowledgeBase::<f64>::parse(src).expect_err("expected invalid program")
    }

    #[test]
    fn indexes_rules_constraints_and_assumables() {
        let kb = kb("a <- b, c.\na <- d.\nb.\nfalse <- a, d.\nassumable( d, 0.3 ).");
        assert_eq!(kb.rules_for("a", 0).len(), 2);
        assert_eq!(kb.rules_for("b", 0).len(), 1);
        assert_eq!(kb.rules_for("missing", 0).len(), 0);
        assert_eq!(kb.constraints().len(), 1);
        assert_eq!(kb.assumables().len(), 1);
        assert!(kb.warnings().is_empty());
    }

    #[test]
    fn prior_out_of_range_is_an_error() {
        let diags = kb_err("assumable( h, 1.5 ).");
        assert!(diags.iter().any(|d| d.code == "kb/prior-out-of-range"));
        // Boundary priors are fine.
        let kb = kb("assumable( h0, 0 ).\nassumable( h1, 1 ).");
        assert_eq!(kb.assumables().len(), 2);
    }

    #[test]
    fn false_misuse_is_rejected() {
        assert!(kb_err("false(x) <- a.")
            .iter()
            .any(|d| d.code == "kb/false-arity"));
        assert!(kb_err("a <- false.")
            .iter()
            .any(|d| d.code == "kb/false-in-body"));
        assert!(kb_err("assumable( false, 0.5 ).")
            .iter()
            .any(|d| d.code == "kb/reserved-predicate"));
    }

    #[test]
    fn reserved_assumable_predicate() {
        assert!(kb_err("b <- assumable(x).")
            .iter()
            .any(|d| d.code == "kb/reserved-predicate"));
    }

    #[test]
    fn overlapping_templates_are_rejected() {
        let diags = kb_err("assumable( h(X), 0.2 ).\nassumable( h(a), 0.3 ).");
        assert!(diags.iter().any(|d| d.code == "kb/overlapping-assumables"));
        // Non-unifiable instances of the same predicate are fine.
        let kb = kb("assumable( h(a), 0.2 ).\nassumable( h(b), 0.3 ).");
        assert_eq!(kb.assumables().len(), 2);
    }

    #[test]
    fn head_unifying_with_template_is_rejected() {
        let diags = kb_err("h(a) <- b.\nassumable( h(X), 0.2 ).");
        assert!(diags.iter().any(|d| d.code == "kb/assumable-head"));
    }

    #[test]
    fn duplicates_modulo_renaming_are_dropped_with_warning() {
        let kb = kb("p(X) <- q(X).\np(Y) <- q(Y).\nassumable( q(Z), 0.5 ).\nassumable( q(W), 0.5 ).");
        assert_eq!(kb.rules_for("p", 1).len(), 1);
        assert_eq!(kb.assumables().len(), 1);
        assert_eq!(
            kb.warnings()
                .iter()
                .filter(|d| d.code.starts_with("kb/duplicate"))
                .count(),
            2
        );
    }

    #[test]
    fn cyclic_rules_warn() {
        let kb = kb("a <- b.\nb <- a.");
        assert!(kb.warnings().iter().any(|d| d.code == "kb/cyclic-rules"));
        let kb2 = kb2_helper();
        assert!(kb2.warnings().iter().all(|d| d.code != "kb/cyclic-rules"));
    }

    fn kb2_helper() -> KnowledgeBase<f64> {
        kb("a <- b, c.\nb <- c.\nc.")
    }

    #[test]
    fn matching_rules_rename_apart() {
        let kb = kb("p(X, Y) <- q(X), r(Y).");
        let goal = parse_atom("p(a, X)").unwrap();
        let mut fresh = kb.fresh_vars();
        let matches = kb.matching_rules(&goal, &mut fresh);
        assert_eq!(matches.len(), 1);
        let (clause, theta) = &matches[0];
        // The rule's own X must not be captured by the goal's X.
        assert_eq!(theta.apply_atom(&clause.head), theta.apply_atom(&goal));
        let body0 = theta.apply_atom(&clause.body[0]);
        assert_eq!(body0.args[0], Term::constant("a"));
    }

    #[test]
    fn false_goal_matches_constraints() {
        let kb = kb("false <- a, b.\nfalse <- c.\nd <- a.");
        let mut fresh = kb.fresh_vars();
        let matches = kb.matching_rules(&Atom::falsum(), &mut fresh);
        assert_eq!(matches.len(), 2);
        assert!(matches.iter().all(|(c, s)| c.is_constraint() && s.is_empty()));
    }

    #[test]
    fn assumable_matches_branch_over_templates() {
        let kb = kb("assumable( fire(yes), 0.01 ).\nassumable( fire(no), 0.99 ).");
        let mut fresh = kb.fresh_vars();
        let goal = parse_atom("fire(Fi)").unwrap();
        let ms = kb.assumable_matches(&goal, &mut fresh).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].instance, parse_atom("fire(yes)").unwrap());
        assert_eq!(ms[0].prior, 0.01);
        assert_eq!(ms[1].instance, parse_atom("fire(no)").unwrap());
        assert_eq!(ms[1].prior, 0.99);
        // Unifiers bind the goal variable to each branch's value.
        assert_eq!(ms[0].unifier.get("Fi"), Some(&Term::constant("yes")));
        // The singular accessor rejects the ambiguity...
        assert!(matches!(
            kb.assumable_match(&goal),
            Err(MatchError::AmbiguousMatch { .. })
        ));
        // ...but resolves ground goals.
        let (instance, prior) = kb
            .assumable_match(&parse_atom("fire(yes)").unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(instance, parse_atom("fire(yes)").unwrap());
        assert_eq!(prior, 0.01);
        assert_eq!(
            kb.assumable_match(&parse_atom("smoke(yes)").unwrap()).unwrap(),
            None
        );
    }

    #[test]
    fn open_template_instances_take_template_prior() {
        let kb = kb("assumable( h(X), 0.5 ).");
        let (instance, prior) = kb
            .assumable_match(&parse_atom("h(a)").unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(instance, parse_atom("h(a)").unwrap());
        assert_eq!(prior, 0.5);
    }

    #[test]
    fn non_ground_assumption_is_an_error() {
        let kb = kb("assumable( h(X), 0.5 ).");
        let mut fresh = kb.fresh_vars();
        let err = kb
            .assumable_matches(&parse_atom("h(Y)").unwrap(), &mut fresh)
            .unwrap_err();
        assert!(matches!(err, MatchError::NonGroundAssumption { .. }));
    }

    #[test]
    fn fresh_vars_avoid_parsed_names() {
        let kb = kb("p(_V3) <- q(_V3).");
        let mut fresh = kb.fresh_vars();
        assert_eq!(fresh.fresh(), "_V4");
    }

    #[test]
    fn unconditional_false_warns() {
        let kb = kb("false.");
        assert!(kb
            .warnings()
            .iter()
            .any(|d| d.code == "kb/unconditional-inconsistency"));
    }
}
