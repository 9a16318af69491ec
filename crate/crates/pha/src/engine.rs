//! Best-first enumeration of minimal consistent explanations.
//!
//! The search keeps a priority queue of partial explanations `⟨goal ← C, D⟩`:
//! a conjunction `C` still to be proved and the hypotheses `D` assumed so far.
//! Two seeds start every search — one for the query and one for `false`, so
//! inconsistent hypothesis sets (nogoods) are discovered in the same sweep and
//! in priority order. Expanding the leftmost atom of `C` either resolves it
//! against rule heads (SLD step, prior unchanged) or assumes it via an
//! assumable template (prior multiplied). An entry whose conjunction empties
//! becomes an explanation or a nogood, depending on its seed.
//!
//! Queue priorities are exact; the documented 1e-12 tie tolerance is applied
//! when popping (the tied group is drawn together and ordered false-first,
//! then by insertion sequence), keeping the heap's ordering total.
//!
//! Hypothesis atoms are interned to integer ids per search (sets are sorted
//! id vectors), and goal conjunctions are shared-suffix cons lists; both keep
//! the hot nogood-subset and enqueue paths allocation-light.

use std::collections::{BinaryHeap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::kb::{KnowledgeBase, MatchError};
use crate::prob::{MassAccumulator, Probability};
use crate::terms::{Atom, FreshVars, Substitution};

/// Which seed a queue entry descends from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalKind {
    User,
    False,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum EngineError {
    #[error("query atom {0} is not ground")]
    NonGroundQuery(Atom),
    #[error(transparent)]
    Match(#[from] MatchError),
}

// --- goal conjunctions -------------------------------------------------------

/// Immutable cons list of goal atoms. Tails are shared between siblings, and
/// a ground suffix survives substitution application unchanged (one `Arc`
/// bump instead of a rebuild).
#[derive(Clone, Debug, Default)]
struct GoalList(Option<Arc<GoalNode>>);

#[derive(Debug)]
struct GoalNode {
    atom: Atom,
    ground_suffix: bool,
    tail: GoalList,
}

impl GoalList {
    fn nil() -> GoalList {
        GoalList(None)
    }

    fn cons(atom: Atom, tail: GoalList) -> GoalList {
        let ground_suffix = atom.is_ground() && tail.is_ground();
        GoalList(Some(Arc::new(GoalNode {
            atom,
            ground_suffix,
            tail,
        })))
    }

    fn from_slice(atoms: &[Atom]) -> GoalList {
        atoms
            .iter()
            .rev()
            .fold(GoalList::nil(), |tail, a| GoalList::cons(a.clone(), tail))
    }

    fn is_ground(&self) -> bool {
        self.0.as_ref().map_or(true, |n| n.ground_suffix)
    }

    fn head(&self) -> Option<(&Atom, &GoalList)> {
        self.0.as_ref().map(|n| (&n.atom, &n.tail))
    }

    fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    fn apply(&self, theta: &Substitution) -> GoalList {
        if theta.is_empty() || self.is_ground() {
            return self.clone();
        }
        let node = self.0.as_ref().expect("non-ground list is nonempty");
        GoalList::cons(theta.apply_atom(&node.atom), node.tail.apply(theta))
    }

    fn to_vec(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Some((a, tail)) = cur.head() {
            out.push(a.clone());
            cur = tail;
        }
        out
    }
}

// --- interned hypothesis sets ------------------------------------------------

#[derive(Default, Debug)]
struct Interner {
    ids: HashMap<Atom, u32>,
    atoms: Vec<Atom>,
}

impl Interner {
    fn intern(&mut self, a: &Atom) -> u32 {
        if let Some(&id) = self.ids.get(a) {
            return id;
        }
        let id = u32::try_from(self.atoms.len()).expect("hypothesis universe fits u32");
        self.ids.insert(a.clone(), id);
        self.atoms.push(a.clone());
        id
    }

    fn resolve(&self, id: u32) -> &Atom {
        &self.atoms[id as usize]
    }
}

/// Sorted vector of interned hypothesis ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct HypSet(Vec<u32>);

impl HypSet {
    fn contains(&self, id: u32) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    fn with(&self, id: u32) -> HypSet {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        match self.0.binary_search(&id) {
            Ok(_) => v.extend_from_slice(&self.0),
            Err(at) => {
                v.extend_from_slice(&self.0[..at]);
                v.push(id);
                v.extend_from_slice(&self.0[at..]);
            }
        }
        HypSet(v)
    }

    fn is_subset(&self, other: &HypSet) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for x in &self.0 {
            for y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    fn is_strict_subset(&self, other: &HypSet) -> bool {
        self.0.len() < other.0.len() && self.is_subset(other)
    }

    fn atoms(&self, interner: &Interner) -> BTreeSet<Atom> {
        self.0.iter().map(|&id| interner.resolve(id).clone()).collect()
    }
}

/// Nogoods indexed by smallest member id: any `N ⊆ D` has `min(N) ∈ D`, so a
/// subset query only inspects the buckets of `D`'s own elements.
#[derive(Debug, Default)]
struct NogoodStore {
    sets: Vec<HypSet>,
    by_min: HashMap<u32, Vec<usize>>,
    has_empty: bool,
}

impl NogoodStore {
    fn len(&self) -> usize {
        self.sets.len() + usize::from(self.has_empty)
    }

    fn dominates(&self, d: &HypSet) -> bool {
        if self.has_empty {
            return true;
        }
        for &id in &d.0 {
            if let Some(bucket) = self.by_min.get(&id) {
                if bucket.iter().any(|&i| self.sets[i].is_subset(d)) {
                    return true;
                }
            }
        }
        false
    }

    /// Insert a fresh nogood, dropping any stored superset of it.
    /// Callers check `dominates` first.
    fn insert(&mut self, n: HypSet) {
        if n.0.is_empty() {
            self.has_empty = true;
            self.sets.clear();
            self.by_min.clear();
            return;
        }
        let had = self.sets.len();
        self.sets.retain(|m| !n.is_subset(m));
        if self.sets.len() != had {
            self.by_min.clear();
            for (i, s) in self.sets.iter().enumerate() {
                self.by_min.entry(s.0[0]).or_default().push(i);
            }
        }
        self.by_min.entry(n.0[0]).or_default().push(self.sets.len());
        self.sets.push(n);
    }

    fn iter(&self) -> impl Iterator<Item = &HypSet> {
        self.sets.iter()
    }
}

// --- queue -------------------------------------------------------------------

#[derive(Debug)]
struct QueueEntry<P> {
    kind: GoalKind,
    remaining: GoalList,
    hyps: HypSet,
    prior: P,
    seq: u64,
}

#[derive(Debug)]
struct HeapItem<P>(QueueEntry<P>);

impl<P: Probability> PartialEq for HeapItem<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.seq == other.0.seq
    }
}

impl<P: Probability> Eq for HeapItem<P> {}

impl<P: Probability> PartialOrd for HeapItem<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: Probability> Ord for HeapItem<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: highest prior first; equal priors pop lowest seq first.
        // Priors are products of validated [0,1] values, never NaN.
        self.0
            .prior
            .partial_cmp(&other.0.prior)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

// --- public result types -------------------------------------------------------

/// Snapshot view of one queue entry.
#[derive(Clone, Debug)]
pub struct PartialExplanation<P> {
    pub goal: GoalKind,
    pub remaining: Vec<Atom>,
    pub hypotheses: BTreeSet<Atom>,
    pub prior: P,
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Explanation<P> {
    pub hypotheses: BTreeSet<Atom>,
    pub prior: P,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nogood {
    pub hypotheses: BTreeSet<Atom>,
}

#[derive(Clone, Debug)]
pub enum StepOutcome<P> {
    /// An entry was expanded (or a completed candidate discarded);
    /// `children` new entries were enqueued.
    Expanded { children: usize },
    EmittedExplanation(Explanation<P>),
    EmittedNogood(Nogood),
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// Queue drained: the explanation list is complete.
    Exhausted,
    MaxExpansions,
    MaxExplanations,
    MassGapReached,
}

/// Stop `run` once the queue mass is negligible next to the found mass:
/// `P_Q ≤ epsilon * max(P_D, floor)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassGap {
    pub epsilon: f64,
    pub floor: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StopCriteria {
    pub max_expansions: Option<u64>,
    pub max_explanations: Option<usize>,
    pub mass_gap: Option<MassGap>,
}

impl StopCriteria {
    /// Run until the queue drains.
    pub fn exhaustive() -> StopCriteria {
        StopCriteria::default()
    }

    pub fn with_max_expansions(n: u64) -> StopCriteria {
        StopCriteria {
            max_expansions: Some(n),
            ..Default::default()
        }
    }

    /// The criterion that currently holds for `state`, if any. Checked
    /// before every expansion by [`SearchState::run`]; public so callers
    /// driving [`SearchState::step`] themselves stop identically.
    pub fn satisfied<P: Probability>(
        &self,
        state: &SearchState<P>,
    ) -> Option<TerminationReason> {
        if let Some(m) = self.max_explanations {
            if state.found.len() >= m {
                return Some(TerminationReason::MaxExplanations);
            }
        }
        if let Some(m) = self.max_expansions {
            if state.expansions >= m {
                return Some(TerminationReason::MaxExpansions);
            }
        }
        if let Some(gap) = &self.mass_gap {
            let p_q = state.p_q.value().to_linear();
            let p_d = state.p_d.value().to_linear();
            if p_q <= gap.epsilon * p_d.max(gap.floor) {
                return Some(TerminationReason::MassGapReached);
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Keep partial explanations whose prior reaches exactly 0. They add no
    /// mass but matter for purely logical diagnosis.
    pub keep_zero: bool,
    /// Pop false-goal entries before user-goal entries on priority ties.
    /// This is the documented behavior; disabling it exists so tests can
    /// force an explanation to be emitted before the nogood that covers it,
    /// exercising the retraction path.
    pub false_preference: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            keep_zero: false,
            false_preference: true,
        }
    }
}

/// Aggregate outcome of a [`SearchState::run`].
#[derive(Clone, Debug)]
pub struct SearchReport<P> {
    pub explanations: Vec<Explanation<P>>,
    pub nogoods: Vec<Nogood>,
    pub lower: P,
    pub upper: P,
    pub termination: TerminationReason,
    pub expansions: u64,
    pub duplicates: u64,
    pub retractions: u64,
    /// Set when duplicate hypothesis sets were reached by distinct proofs:
    /// the program violates the disjoint-explanations reading and the mass
    /// sum may overcount.
    pub disjointness_warning: bool,
}

// --- the search ---------------------------------------------------------------

#[derive(Debug)]
pub struct SearchState<P: Probability> {
    query: Vec<Atom>,
    queue: BinaryHeap<HeapItem<P>>,
    interner: Interner,
    found: Vec<(HypSet, Explanation<P>)>,
    nogoods: NogoodStore,
    p_d: P::Accumulator,
    p_q: P::Accumulator,
    expansions: u64,
    duplicates: u64,
    retractions: u64,
    discarded_inconsistent: u64,
    discarded_nonminimal: u64,
    seq: u64,
    fresh: FreshVars,
    options: SearchOptions,
}

impl<P: Probability> SearchState<P> {
    /// Seed a search for a ground conjunction: one user-goal entry for the
    /// query, one false-goal entry for constraint discovery.
    pub fn new(
        kb: &KnowledgeBase<P>,
        query: Vec<Atom>,
        options: SearchOptions,
    ) -> Result<SearchState<P>, EngineError> {
        if let Some(bad) = query.iter().find(|a| !a.is_ground()) {
            return Err(EngineError::NonGroundQuery(bad.clone()));
        }
        let mut state = SearchState {
            query: query.clone(),
            queue: BinaryHeap::new(),
            interner: Interner::default(),
            found: Vec::new(),
            nogoods: NogoodStore::default(),
            p_d: P::Accumulator::new(),
            p_q: P::Accumulator::new(),
            expansions: 0,
            duplicates: 0,
            retractions: 0,
            discarded_inconsistent: 0,
            discarded_nonminimal: 0,
            seq: 0,
            fresh: kb.fresh_vars(),
            options,
        };
        state.enqueue(GoalKind::User, GoalList::from_slice(&query), HypSet::default(), P::one());
        state.enqueue(
            GoalKind::False,
            GoalList::cons(Atom::falsum(), GoalList::nil()),
            HypSet::default(),
            P::one(),
        );
        Ok(state)
    }

    fn enqueue(&mut self, kind: GoalKind, remaining: GoalList, hyps: HypSet, prior: P) {
        if kind == GoalKind::User {
            self.p_q.add(prior);
        }
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(HeapItem(QueueEntry {
            kind,
            remaining,
            hyps,
            prior,
            seq,
        }));
    }

    /// Pop the maximum-prior entry; within the group tied up to the 1e-12
    /// tolerance, false-goal entries first (unless disabled), then lowest seq.
    fn pop_best(&mut self) -> Option<QueueEntry<P>> {
        let first = self.queue.pop()?.0;
        if !self
            .queue
            .peek()
            .is_some_and(|it| it.0.prior.queue_tied(first.prior))
        {
            return Some(first);
        }
        let mut group = vec![first];
        while let Some(it) = self.queue.peek() {
            if it.0.prior.queue_tied(group[0].prior) {
                group.push(self.queue.pop().expect("peeked").0);
            } else {
                break;
            }
        }
        let rank = |e: &QueueEntry<P>| -> (u8, u64) {
            let kind_rank = if self.options.false_preference && e.kind == GoalKind::False {
                0
            } else {
                1
            };
            (kind_rank, e.seq)
        };
        let best = group
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| rank(e))
            .map(|(i, _)| i)
            .expect("group is nonempty");
        let chosen = group.swap_remove(best);
        for e in group {
            self.queue.push(HeapItem(e));
        }
        Some(chosen)
    }

    /// One expansion: pop the best entry and either complete it (explanation,
    /// nogood, or discard) or enqueue its children.
    pub fn step(&mut self, kb: &KnowledgeBase<P>) -> Result<StepOutcome<P>, EngineError> {
        let Some(entry) = self.pop_best() else {
            return Ok(StepOutcome::Exhausted);
        };
        self.expansions += 1;
        if entry.kind == GoalKind::User {
            self.p_q.sub(entry.prior);
        }

        if entry.remaining.is_empty() {
            return Ok(match entry.kind {
                GoalKind::False => self.complete_nogood(entry),
                GoalKind::User => self.complete_explanation(entry),
            });
        }

        let (goal, rest) = entry.remaining.head().expect("checked nonempty");
        let goal = goal.clone();
        let rest = rest.clone();

        let assumptions = kb.assumable_matches(&goal, &mut self.fresh)?;
        let mut children = 0;

        // Rule operation: SLD-resolve the leftmost atom, prior unchanged.
        for (clause, theta) in kb.matching_rules(&goal, &mut self.fresh) {
            let mut remaining = rest.apply(&theta);
            for b in clause.body.iter().rev() {
                remaining = GoalList::cons(theta.apply_atom(b), remaining);
            }
            self.enqueue(entry.kind, remaining, entry.hyps.clone(), entry.prior);
            children += 1;
        }

        // Assumption operation: assume the (ground) instance, multiplying in
        // its prior — unless it is already assumed, in which case it's free.
        for m in assumptions {
            let remaining = rest.apply(&m.unifier);
            let id = self.interner.intern(&m.instance);
            if entry.hyps.contains(id) {
                self.enqueue(entry.kind, remaining, entry.hyps.clone(), entry.prior);
                children += 1;
                continue;
            }
            let prior = entry.prior * m.prior;
            if prior.is_zero() && !self.options.keep_zero {
                continue;
            }
            let hyps = entry.hyps.with(id);
            if self.nogoods.dominates(&hyps) {
                continue;
            }
            self.enqueue(entry.kind, remaining, hyps, prior);
            children += 1;
        }

        Ok(StepOutcome::Expanded { children })
    }

    fn complete_nogood(&mut self, entry: QueueEntry<P>) -> StepOutcome<P> {
        let n = entry.hyps;
        if self.nogoods.dominates(&n) {
            // Already implied by a recorded nogood; nothing new to purge.
            return StepOutcome::Expanded { children: 0 };
        }
        self.nogoods.insert(n.clone());

        // Purge queue entries that carry the contradiction.
        let mut removed_user = false;
        let items = std::mem::take(&mut self.queue).into_vec();
        self.queue = items
            .into_iter()
            .filter(|it| {
                if n.is_subset(&it.0.hyps) {
                    removed_user |= it.0.kind == GoalKind::User;
                    false
                } else {
                    true
                }
            })
            .collect();
        if removed_user {
            self.recompute_p_q();
        }

        // Retract explanations the nogood invalidates.
        let had = self.found.len();
        self.found.retain(|(h, _)| !n.is_subset(h));
        if self.found.len() != had {
            self.retractions += (had - self.found.len()) as u64;
            self.recompute_p_d();
        }

        StepOutcome::EmittedNogood(Nogood {
            hypotheses: n.atoms(&self.interner),
        })
    }

    fn complete_explanation(&mut self, entry: QueueEntry<P>) -> StepOutcome<P> {
        let d = entry.hyps;
        if self.nogoods.dominates(&d) {
            self.discarded_inconsistent += 1;
            return StepOutcome::Expanded { children: 0 };
        }
        if self.found.iter().any(|(h, _)| *h == d) {
            self.duplicates += 1;
            return StepOutcome::Expanded { children: 0 };
        }
        if self.found.iter().any(|(h, _)| h.is_strict_subset(&d)) {
            self.discarded_nonminimal += 1;
            return StepOutcome::Expanded { children: 0 };
        }
        // Keep minimality in the other direction too. Reachable only through
        // priority-tie inversions, but the invariant must hold regardless.
        let had = self.found.len();
        self.found.retain(|(h, _)| !d.is_strict_subset(h));
        let removed = had - self.found.len();

        let explanation = Explanation {
            hypotheses: d.atoms(&self.interner),
            prior: entry.prior,
        };
        self.found.push((d, explanation.clone()));
        if removed > 0 {
            self.retractions += removed as u64;
            self.recompute_p_d();
        } else {
            self.p_d.add(entry.prior);
        }
        StepOutcome::EmittedExplanation(explanation)
    }

    fn recompute_p_d(&mut self) {
        self.p_d.reset();
        for (_, e) in &self.found {
            self.p_d.add(e.prior);
        }
    }

    fn recompute_p_q(&mut self) {
        self.p_q.reset();
        for it in self.queue.iter() {
            if it.0.kind == GoalKind::User {
                self.p_q.add(it.0.prior);
            }
        }
    }

    /// Step until a stop criterion fires or the queue drains.
    pub fn run(
        &mut self,
        kb: &KnowledgeBase<P>,
        stop: &StopCriteria,
    ) -> Result<TerminationReason, EngineError> {
        loop {
            if let Some(reason) = stop.satisfied(self) {
                return Ok(reason);
            }
            if matches!(self.step(kb)?, StepOutcome::Exhausted) {
                return Ok(TerminationReason::Exhausted);
            }
        }
    }

    /// Package the current state. Re-sums the accumulators from scratch so
    /// reported bounds carry no incremental drift.
    pub fn report(&mut self, termination: TerminationReason) -> SearchReport<P> {
        self.recompute_p_d();
        self.recompute_p_q();
        let (lower, upper) = self.bounds();
        SearchReport {
            explanations: self.explanations().cloned().collect(),
            nogoods: self.nogoods().collect(),
            lower,
            upper,
            termination,
            expansions: self.expansions,
            duplicates: self.duplicates,
            retractions: self.retractions,
            disjointness_warning: self.duplicates > 0,
        }
    }

    /// Run to a criterion and package the results.
    pub fn run_report(
        &mut self,
        kb: &KnowledgeBase<P>,
        stop: &StopCriteria,
    ) -> Result<SearchReport<P>, EngineError> {
        let termination = self.run(kb, stop)?;
        Ok(self.report(termination))
    }

    /// `(P_D, min(1, P_D + P_Q))`: the found mass and the largest value the
    /// remaining queue could still add.
    pub fn bounds(&self) -> (P, P) {
        let lower = self.p_d.value();
        let upper = (lower + self.p_q.value()).clamp_unit();
        (lower, upper)
    }

    pub fn query(&self) -> &[Atom] {
        &self.query
    }

    /// `P_D`: prior sum of the explanations found so far.
    pub fn found_mass(&self) -> P {
        self.p_d.value()
    }

    /// `P_Q`: prior sum of the user-goal entries still queued.
    pub fn queue_mass(&self) -> P {
        self.p_q.value()
    }

    /// Explanations in emission order.
    pub fn explanations(&self) -> impl Iterator<Item = &Explanation<P>> {
        self.found.iter().map(|(_, e)| e)
    }

    pub fn nogoods(&self) -> impl Iterator<Item = Nogood> + '_ {
        self.nogoods.iter().map(|n| Nogood {
            hypotheses: n.atoms(&self.interner),
        })
    }

    pub fn nogood_count(&self) -> usize {
        self.nogoods.len()
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn duplicates(&self) -> u64 {
        self.duplicates
    }

    pub fn retractions(&self) -> u64 {
        self.retractions
    }

    pub fn discards(&self) -> (u64, u64) {
        (self.discarded_inconsistent, self.discarded_nonminimal)
    }

    /// Queue contents, best-first. Diagnostic path: materializes every entry.
    pub fn queue_snapshot(&self) -> Vec<PartialExplanation<P>> {
        let mut entries: Vec<PartialExplanation<P>> = self
            .queue
            .iter()
            .map(|it| PartialExplanation {
                goal: it.0.kind,
                remaining: it.0.remaining.to_vec(),
                hypotheses: it.0.hyps.atoms(&self.interner),
                prior: it.0.prior,
                seq: it.0.seq,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.prior
                .partial_cmp(&a.prior)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.seq.cmp(&b.seq))
        });
        entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_atom, parse_query, KnowledgeBase};

    fn kb(src: &str) -> KnowledgeBase<f64> {
        KnowledgeBase::parse(src).unwrap()
    }

    fn state(kb: &KnowledgeBase<f64>, query: &str) -> SearchState<f64> {
        SearchState::new(kb, parse_query(query).unwrap(), SearchOptions::default()).unwrap()
    }

    const FIRE_SMOKE: &str = "\
        assumable( fire(yes), 0.01 ).\n\
        assumable( fire(no), 0.99 ).\n\
        false <- fire(yes), fire(no).\n\
        smoke(Sm) <- fire(Fi), c_smoke(Sm, Fi).\n\
        false <- smoke(yes), smoke(no).\n\
        assumable( c_smoke(yes, yes), 0.9 ).\n\
        assumable( c_smoke(no, yes), 0.1 ).\n\
        assumable( c_smoke(yes, no), 0.01 ).\n\
        assumable( c_smoke(no, no), 0.99 ).\n";

    #[test]
    fn init_seeds_two_entries() {
        let kb = kb(FIRE_SMOKE);
        let s = state(&kb, "smoke(yes)");
        assert_eq!(s.queue_len(), 2);
        let (lower, upper) = s.bounds();
        assert_eq!((lower, upper), (0.0, 1.0));
        let snapshot = s.queue_snapshot();
        assert!(snapshot.iter().any(|e| e.goal == GoalKind::User
            && e.remaining == vec![parse_atom("smoke(yes)").unwrap()]));
        assert!(snapshot
            .iter()
            .any(|e| e.goal == GoalKind::False && e.remaining == vec![Atom::falsum()]));
        assert!(snapshot.iter().all(|e| e.hypotheses.is_empty() && e.prior == 1.0));
    }

    #[test]
    fn conjunction_becomes_one_seed() {
        let kb = kb(FIRE_SMOKE);
        let s = state(&kb, "smoke(yes), smoke(no)");
        let user: Vec<_> = s
            .queue_snapshot()
            .into_iter()
            .filter(|e| e.goal == GoalKind::User)
            .collect();
        assert_eq!(user.len(), 1);
        assert_eq!(user[0].remaining.len(), 2);
    }

    #[test]
    fn non_ground_query_is_rejected() {
        let kb = kb(FIRE_SMOKE);
        let err = SearchState::new(
            &kb,
            parse_query("smoke(X)").unwrap(),
            SearchOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::NonGroundQuery(_)));
    }

    #[test]
    fn sld_step_resolves_leftmost_atom() {
        // Constraint-free variant so the false seed dies immediately and the
        // pop order below is fixed.
        let kb = kb("\
            assumable( fire(yes), 0.01 ).\n\
            assumable( fire(no), 0.99 ).\n\
            smoke(Sm) <- fire(Fi), c_smoke(Sm, Fi).\n\
            assumable( c_smoke(yes, yes), 0.9 ).\n\
            assumable( c_smoke(no, yes), 0.1 ).\n\
            assumable( c_smoke(yes, no), 0.01 ).\n\
            assumable( c_smoke(no, no), 0.99 ).\n");
        let mut s = state(&kb, "smoke(yes)");
        // Both seeds are tied at prior 1; false pops first by preference and,
        // with no constraints, contributes nothing.
        match s.step(&kb).unwrap() {
            StepOutcome::Expanded { children } => assert_eq!(children, 0),
            other => panic!("expected expansion, got {other:?}"),
        }
        // Now the user seed: exactly one rule child, no assumable match.
        match s.step(&kb).unwrap() {
            StepOutcome::Expanded { children } => assert_eq!(children, 1),
            other => panic!("expected expansion, got {other:?}"),
        }
        let child = s
            .queue_snapshot()
            .into_iter()
            .find(|e| e.goal == GoalKind::User)
            .expect("user child queued");
        assert_eq!(child.prior, 1.0);
        assert_eq!(child.remaining.len(), 2);
        assert_eq!(child.remaining[0].predicate, "fire");
        assert_eq!(child.remaining[1].predicate, "c_smoke");
        assert_eq!(child.remaining[1].args[0], crate::terms::Term::constant("yes"));
    }

    #[test]
    fn exhaustive_run_emits_both_fire_cases_ordered() {
        let kb = kb(FIRE_SMOKE);
        let mut s = state(&kb, "smoke(yes)");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert_eq!(report.termination, TerminationReason::Exhausted);
        assert_eq!(report.explanations.len(), 2);
        // Emission order is by prior: 0.99 * 0.01 beats 0.01 * 0.9.
        assert!((report.explanations[0].prior - 0.0099).abs() < 1e-15);
        assert_eq!(
            report.explanations[0].hypotheses,
            [
                parse_atom("fire(no)").unwrap(),
                parse_atom("c_smoke(yes, no)").unwrap()
            ]
            .into()
        );
        assert!((report.explanations[1].prior - 0.009).abs() < 1e-15);
        assert!((report.lower - 0.0189).abs() < 1e-12);
        assert_eq!(report.lower, report.upper);
        assert_eq!(report.retractions, 0);
        assert!(!report.disjointness_warning);
    }

    #[test]
    fn contradictory_query_exhausts_empty() {
        let kb = kb(FIRE_SMOKE);
        let mut s = state(&kb, "smoke(yes), smoke(no)");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert!(report.explanations.is_empty());
        assert_eq!(report.lower, 0.0);
        assert_eq!(report.upper, 0.0);
    }

    #[test]
    fn zero_budget_means_no_work() {
        let kb = kb(FIRE_SMOKE);
        let mut s = state(&kb, "smoke(yes)");
        let report = s
            .run_report(&kb, &StopCriteria::with_max_expansions(0))
            .unwrap();
        assert_eq!(report.termination, TerminationReason::MaxExpansions);
        assert!(report.explanations.is_empty());
        assert_eq!((report.lower, report.upper), (0.0, 1.0));
        assert_eq!(report.expansions, 0);
    }

    #[test]
    fn bounds_never_exceed_one() {
        // Two rules for g duplicate the queue mass; the upper bound clamps.
        let kb = kb("assumable( h, 0.5 ).\ng <- h.\ng <- h, h.");
        let mut s = state(&kb, "g");
        let mut max_upper: f64 = 0.0;
        loop {
            let (lower, upper) = s.bounds();
            assert!(lower <= upper + 1e-15);
            max_upper = max_upper.max(upper);
            if matches!(s.step(&kb).unwrap(), StepOutcome::Exhausted) {
                break;
            }
        }
        assert!(max_upper <= 1.0);
    }

    #[test]
    fn duplicate_proofs_are_counted_once() {
        let kb = kb("assumable( h, 0.5 ).\ng <- a.\ng <- b.\na <- h.\nb <- h.");
        let mut s = state(&kb, "g");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert_eq!(report.explanations.len(), 1);
        assert_eq!(report.duplicates, 1);
        assert!(report.disjointness_warning);
        assert!((report.lower - 0.5).abs() < 1e-15);
    }

    #[test]
    fn repeated_assumption_is_free() {
        let kb = kb("assumable( h, 0.25 ).\ng <- h, h.");
        let mut s = state(&kb, "g");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert_eq!(report.explanations.len(), 1);
        assert_eq!(report.explanations[0].prior, 0.25);
        assert_eq!(report.explanations[0].hypotheses.len(), 1);
    }

    #[test]
    fn zero_priors_prune_unless_kept() {
        let kb = kb("assumable( h, 0 ).\ng <- h.");
        let mut s = state(&kb, "g");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert!(report.explanations.is_empty());
        assert_eq!(report.upper, 0.0);

        let mut s = SearchState::new(
            &kb,
            parse_query("g").unwrap(),
            SearchOptions {
                keep_zero: true,
                ..Default::default()
            },
        )
        .unwrap();
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert_eq!(report.explanations.len(), 1);
        assert_eq!(report.explanations[0].prior, 0.0);
    }

    #[test]
    fn non_ground_assumption_propagates() {
        let kb = kb("assumable( h(X), 0.5 ).\ng <- h(Y).");
        let mut s = state(&kb, "g");
        let err = loop {
            match s.step(&kb) {
                Ok(StepOutcome::Exhausted) => panic!("expected an error"),
                Ok(_) => continue,
                Err(e) => break e,
            }
        };
        assert!(matches!(err, EngineError::Match(MatchError::NonGroundAssumption { .. })));
    }

    /// A nogood and an explanation complete at the same prior; the default
    /// false-preference pops the nogood first, so the explanation candidate
    /// is purged before emission and no retraction is needed.
    #[test]
    fn false_preference_purges_tied_candidate() {
        let src = "assumable( h1, 0.5 ).\na <- h1.\nfalse <- a.\ng <- h1.";
        let kb = kb(src);
        let mut s = state(&kb, "g");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert!(report.explanations.is_empty());
        assert_eq!(report.retractions, 0);
        assert_eq!(
            report.nogoods,
            vec![Nogood {
                hypotheses: [parse_atom("h1").unwrap()].into()
            }]
        );
        assert_eq!(report.lower, 0.0);
        assert_eq!(report.upper, 0.0);

        // Same program, preference disabled: the explanation is emitted first
        // (lower seq) and must be retracted when the nogood lands.
        let mut s = SearchState::new(
            &kb,
            parse_query("g").unwrap(),
            SearchOptions {
                false_preference: false,
                ..Default::default()
            },
        )
        .unwrap();
        let mut saw_emission = false;
        let mut saw_retraction_effect = false;
        loop {
            match s.step(&kb).unwrap() {
                StepOutcome::EmittedExplanation(e) => {
                    assert_eq!(e.prior, 0.5);
                    saw_emission = true;
                }
                StepOutcome::EmittedNogood(_) => {
                    if saw_emission {
                        saw_retraction_effect = s.retractions() == 1;
                    }
                }
                StepOutcome::Exhausted => break,
                StepOutcome::Expanded { .. } => {}
            }
        }
        assert!(saw_emission);
        assert!(saw_retraction_effect, "nogood must retract the earlier emission");
        assert_eq!(s.explanations().count(), 0);
        let (lower, upper) = s.bounds();
        assert_eq!(lower, 0.0);
        assert_eq!(upper, 0.0);
    }

    #[test]
    fn nogood_purges_queue_supersets() {
        // h2's branch of g is doomed once {h1, h2} is a nogood... here the
        // nogood {h1} alone must kill both pending candidates that carry h1.
        let src = "\
            assumable( h1, 0.9 ).\n\
            assumable( h2, 0.5 ).\n\
            bad <- h1.\n\
            false <- bad.\n\
            g <- h1, h2.\n\
            g <- h2.\n";
        let kb = kb(src);
        let mut s = state(&kb, "g");
        let report = s.run_report(&kb, &StopCriteria::exhaustive()).unwrap();
        assert_eq!(report.explanations.len(), 1);
        assert_eq!(
            report.explanations[0].hypotheses,
            [parse_atom("h2").unwrap()].into()
        );
        assert_eq!(report.retractions, 0);
    }

    #[test]
    fn max_explanations_stops_early_with_sound_bounds() {
        let kb = kb(FIRE_SMOKE);
        let mut s = state(&kb, "smoke(yes)");
        let stop = StopCriteria {
            max_explanations: Some(1),
            ..Default::default()
        };
        let report = s.run_report(&kb, &stop).unwrap();
        assert_eq!(report.termination, TerminationReason::MaxExplanations);
        assert_eq!(report.explanations.len(), 1);
        assert!(report.lower <= 0.0189 && 0.0189 <= report.upper + 1e-12);
        assert!(report.upper < 1.0);
    }

    #[test]
    fn mass_gap_stop_fires() {
        let kb = kb(FIRE_SMOKE);
        let mut s = state(&kb, "smoke(yes)");
        let stop = StopCriteria {
            mass_gap: Some(MassGap {
                epsilon: 0.5,
                floor: 0.0,
            }),
            ..Default::default()
        };
        let report = s.run_report(&kb, &stop).unwrap();
        assert_eq!(report.termination, TerminationReason::MassGapReached);
        // The criterion guarantees the interval is tight relative to P_D.
        assert!(report.upper - report.lower <= 0.5 * report.lower + 1e-12);
    }
}
