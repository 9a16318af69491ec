//! First-order terms, atoms and substitutions.
//!
//! Variables start with an uppercase letter or `_`; constants and functors
//! with a lowercase letter or digit. Substitutions are kept idempotent: no
//! bound variable ever appears in a binding's right-hand side, so a single
//! application fully resolves a term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Variable(String),
    Constant(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Constant(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Compound(functor.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Constant(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Variable(v) => {
                out.insert(v);
            }
            Term::Constant(_) => {}
            Term::Compound(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Variable(v) => v == name,
            Term::Constant(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => write!(f, "{v}"),
            Term::Constant(c) => write!(f, "{c}"),
            Term::Compound(functor, args) => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Predicate name reserved for the inconsistency goal.
pub const FALSE: &str = "false";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn propositional(predicate: impl Into<String>) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    /// The nullary `false` atom.
    pub fn falsum() -> Atom {
        Atom::propositional(FALSE)
    }

    pub fn is_falsum(&self) -> bool {
        self.predicate == FALSE && self.args.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        for a in &self.args {
            a.collect_vars(out);
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.predicate)
        } else {
            write!(f, "{}(", self.predicate)?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        }
    }
}

/// An idempotent variable binding. Applying it once yields a fixpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        match t {
            Term::Variable(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Constant(_) => t.clone(),
            Term::Compound(functor, args) => Term::Compound(
                functor.clone(),
                args.iter().map(|a| self.apply(a)).collect(),
            ),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        if self.bindings.is_empty() {
            return a.clone();
        }
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.apply(t)).collect(),
        }
    }

    /// Bind `var := t` where `t` is already resolved under `self`.
    /// Fails the occurs check if `t` mentions `var`.
    fn bind(&mut self, var: &str, t: Term) -> bool {
        if t.contains_var(var) {
            return false;
        }
        // Keep idempotence: eliminate `var` from existing right-hand sides.
        if !self.bindings.is_empty() {
            let single = SingleBinding { var, t: &t };
            for rhs in self.bindings.values_mut() {
                if rhs.contains_var(var) {
                    *rhs = single.apply(rhs);
                }
            }
        }
        self.bindings.insert(var.to_string(), t);
        true
    }
}

struct SingleBinding<'a> {
    var: &'a str,
    t: &'a Term,
}

impl SingleBinding<'_> {
    fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Variable(v) if v == self.var => self.t.clone(),
            Term::Variable(_) | Term::Constant(_) => term.clone(),
            Term::Compound(functor, args) => Term::Compound(
                functor.clone(),
                args.iter().map(|a| self.apply(a)).collect(),
            ),
        }
    }
}

/// Most general unifier of two terms, or `None` if they don't unify.
/// Runs the occurs check, so cyclic bindings are rejected.
pub fn unify(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    if unify_into(a, b, &mut s) {
        Some(s)
    } else {
        None
    }
}

pub fn unify_atoms(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        if !unify_into(x, y, &mut s) {
            return None;
        }
    }
    Some(s)
}

fn unify_into(a: &Term, b: &Term, s: &mut Substitution) -> bool {
    let a = s.apply(a);
    let b = s.apply(b);
    match (&a, &b) {
        (Term::Variable(x), Term::Variable(y)) if x == y => true,
        (Term::Variable(x), _) => s.bind(x, b.clone()),
        (_, Term::Variable(y)) => s.bind(y, a.clone()),
        (Term::Constant(x), Term::Constant(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, s))
        }
        _ => false,
    }
}

/// Generator of variable names guaranteed fresh with respect to everything
/// the owner has seen (callers seed `floor` past any existing `_V<n>`).
#[derive(Clone, Debug, Default)]
pub struct FreshVars {
    next: u64,
}

impl FreshVars {
    pub fn starting_at(next: u64) -> FreshVars {
        FreshVars { next }
    }

    pub fn fresh(&mut self) -> String {
        let n = self.next;
        self.next += 1;
        format!("_V{n}")
    }

    /// Build a renaming substitution covering `vars`.
    pub fn renaming<'a>(&mut self, vars: impl IntoIterator<Item = &'a str>) -> Substitution {
        let mut s = Substitution::new();
        for v in vars {
            let fresh = Term::var(self.fresh());
            s.bindings.insert(v.to_string(), fresh);
        }
        s
    }
}

/// Extract `n` from a `_V<n>` name, used to keep fresh names ahead of any
/// already present in parsed input.
pub fn fresh_index(name: &str) -> Option<u64> {
    let digits = name.strip_prefix("_V")?;
    if digits.is_empty() {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn unifies_variable_against_constant() {
        let a = Atom::new("fire", vec![v("X")]);
        let b = Atom::new("fire", vec![c("yes")]);
        let s = unify_atoms(&a, &b).unwrap();
        assert_eq!(s.get("X"), Some(&c("yes")));
        assert_eq!(s.apply_atom(&a), b);
    }

    #[test]
    fn clashing_constants_fail() {
        assert!(unify(&c("yes"), &c("no")).is_none());
        assert!(unify_atoms(
            &Atom::new("p", vec![c("a")]),
            &Atom::new("q", vec![c("a")])
        )
        .is_none());
        assert!(unify_atoms(&Atom::new("p", vec![c("a")]), &Atom::propositional("p")).is_none());
    }

    #[test]
    fn occurs_check_rejects_cyclic_binding() {
        let t = Term::compound("f", vec![v("X")]);
        assert!(unify(&v("X"), &t).is_none());
        // ... but an inner repeat of an unrelated variable is fine.
        assert!(unify(&v("Y"), &Term::compound("f", vec![v("X"), v("X")])).is_some());
    }

    #[test]
    fn chained_bindings_resolve() {
        // p(X, Y) against p(Y, a): both end up at a.
        let s = unify_atoms(
            &Atom::new("p", vec![v("X"), v("Y")]),
            &Atom::new("p", vec![v("Y"), c("a")]),
        )
        .unwrap();
        assert_eq!(s.apply(&v("X")), c("a"));
        assert_eq!(s.apply(&v("Y")), c("a"));
    }

    #[test]
    fn compound_unification_descends() {
        let a = Term::compound("f", vec![v("X"), Term::compound("g", vec![v("X")])]);
        let b = Term::compound("f", vec![c("a"), Term::compound("g", vec![v("Z")])]);
        let s = unify(&a, &b).unwrap();
        assert_eq!(s.apply(&a), s.apply(&b));
        assert_eq!(s.apply(&v("Z")), c("a"));
    }

    #[test]
    fn renaming_is_fresh() {
        let mut f = FreshVars::starting_at(7);
        let s = f.renaming(["X", "Y"]);
        assert_eq!(s.apply(&v("X")), v("_V7"));
        assert_eq!(s.apply(&v("Y")), v("_V8"));
        assert_eq!(fresh_index("_V8"), Some(8));
        assert_eq!(fresh_index("_Vx"), None);
        assert_eq!(fresh_index("X"), None);
    }

    // -- property tests ------------------------------------------------

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop_oneof![Just("X"), Just("Y"), Just("Z")].prop_map(Term::var),
            prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(Term::constant),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            (
                prop_oneof![Just("f"), Just("g")],
                prop::collection::vec(inner, 1..3),
            )
                .prop_map(|(f, args)| Term::compound(f, args))
        })
    }

    fn arb_ground_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(Term::constant);
        leaf.prop_recursive(3, 16, 3, |inner| {
            (
                prop_oneof![Just("f"), Just("g")],
                prop::collection::vec(inner, 1..3),
            )
                .prop_map(|(f, args)| Term::compound(f, args))
        })
    }

    proptest! {
        /// Soundness: when unify succeeds, the unifier really equates the terms.
        #[test]
        fn unifier_equates(a in arb_term(), b in arb_term()) {
            if let Some(s) = unify(&a, &b) {
                prop_assert_eq!(s.apply(&a), s.apply(&b));
            }
        }

        /// Idempotence: applying a unifier twice changes nothing.
        #[test]
        fn unifier_is_idempotent(a in arb_term(), b in arb_term()) {
            if let Some(s) = unify(&a, &b) {
                let once = s.apply(&a);
                prop_assert_eq!(s.apply(&once), once);
            }
        }

        /// Completeness against ground witnesses: any ground instance both
        /// sides reach is reachable from the mgu (so unify may not fail, and
        /// the mgu is at least as general as the witness).
        #[test]
        fn mgu_is_most_general(pat in arb_term(), witness in arb_ground_term()) {
            // Build a and b that both generalize `witness`.
            if let Some(ground_match) = unify(&pat, &witness) {
                let s = unify(&pat, &witness);
                prop_assert!(s.is_some());
                // mgu of pat with itself renamed must also cover witness.
                let mut f = FreshVars::starting_at(0);
                let mut vars = BTreeSet::new();
                pat.collect_vars(&mut vars);
                let renamed = f.renaming(vars.iter().copied()).apply(&pat);
                let mgu = unify(&pat, &renamed).expect("renamed copies must unify");
                // Check: witness is an instance of mgu(pat).
                let general = mgu.apply(&pat);
                prop_assert!(unify(&general, &witness).is_some());
                drop(ground_match);
            }
        }

        /// Application is a homomorphism over term structure.
        #[test]
        fn apply_commutes_with_structure(a in arb_term(), b in arb_term()) {
            if let Some(s) = unify(&a, &b) {
                let wrapped = Term::compound("outer", vec![a.clone(), b.clone()]);
                let applied = s.apply(&wrapped);
                prop_assert_eq!(applied, Term::compound("outer", vec![s.apply(&a), s.apply(&b)]));
            }
        }
    }
}
