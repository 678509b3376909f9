//! Property Δ for pair functions.
//!
//! A pair `a, b` of members of a Δ-system, with the canonical bijection
//! `e : a → b` fixing `a ∩ b` and moving points up, *witnesses* the strong
//! property for `f` when for every `τ ∈ a ∩ b`, `ξ ∈ a \ b`, `η ∈ b \ a`:
//!
//! 1. `a ∩ min{ξ, η} ⊆ f({ξ, η})`;
//! 2. `τ < ξ ⇒ f({τ, η}) ⊆ f({ξ, η})`;
//! 3. `τ < η ⇒ f({τ, ξ}) ⊆ f({ξ, η})`.
//!
//! The weaker property only asks for `a ∩ b ∩ min{ξ, η}` in clause 1 and
//! puts no condition on `e`.

use serde::{Deserialize, Serialize};

use crate::conditions::OrderIso;
use crate::error::{Error, Result};
use crate::pair_table::PairTable;
use crate::set::{FinSet, Ordinal};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMode {
    #[default]
    Strong,
    /// The weak property: clause 1 restricted to the root.
    Bs,
}

/// A family of distinct, equally sized sets with pairwise intersection
/// `root`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaSystem {
    members: Vec<FinSet>,
    root: FinSet,
}

impl DeltaSystem {
    pub fn members(&self) -> &[FinSet] {
        &self.members
    }

    pub fn root(&self) -> &FinSet {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Recognizes a Δ-system. Returns `None` for an empty family, repeated
/// members, unequal sizes or non-constant pairwise intersections. A single
/// member is its own root.
pub fn recognize_delta_system(family: &[FinSet]) -> Option<DeltaSystem> {
    let first = family.first()?;
    let root = match family.get(1) {
        Some(second) => first.intersection(second),
        None => first.clone(),
    };
    for (k, a) in family.iter().enumerate() {
        if a.len() != first.len() {
            return None;
        }
        for b in &family[k + 1..] {
            if a == b || a.intersection(b) != root {
                return None;
            }
        }
    }
    Some(DeltaSystem { members: family.to_vec(), root })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseFailure {
    pub tau: Ordinal,
    pub xi: Ordinal,
    pub eta: Ordinal,
    pub clause: u8,
}

/// The outcome of checking one pair. For clause 1 the `tau` field holds the
/// missing element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    /// Indices into the Δ-system, when the pair came from one.
    pub pair: Option<(usize, usize)>,
    pub e: Vec<(Ordinal, Ordinal)>,
    pub failed_clauses: Vec<ClauseFailure>,
}

impl WitnessReport {
    pub fn ok(&self) -> bool {
        self.failed_clauses.is_empty()
    }
}

fn clause_failures(f: &PairTable, a: &FinSet, b: &FinSet, mode: WitnessMode) -> Vec<ClauseFailure> {
    let root = a.intersection(b);
    let seed = match mode {
        WitnessMode::Strong => a,
        WitnessMode::Bs => &root,
    };
    let mut out = Vec::new();
    for xi in a.difference(b).iter() {
        for eta in b.difference(a).iter() {
            let target = f.get(xi, eta);
            for tau in seed.below(xi.min(eta)).difference(target).iter() {
                out.push(ClauseFailure { tau, xi, eta, clause: 1 });
            }
            for tau in root.iter() {
                if tau < xi && !f.get(tau, eta).is_subset(target) {
                    out.push(ClauseFailure { tau, xi, eta, clause: 2 });
                }
                if tau < eta && !f.get(tau, xi).is_subset(target) {
                    out.push(ClauseFailure { tau, xi, eta, clause: 3 });
                }
            }
        }
    }
    out
}

/// Checks whether `(a, b, e)` witnesses the strong property for `f`.
/// `e` must be the order bijection `a → b`, fix `a ∩ b` and satisfy
/// `ξ ≤ e(ξ)`; otherwise the call fails with a precondition error.
pub fn check_strong_witness(f: &PairTable, a: &FinSet, b: &FinSet, e: &OrderIso) -> Result<WitnessReport> {
    if e.source() != a || e.target() != b || OrderIso::canonical(a, b).as_ref() != Some(e) {
        return Err(Error::Precondition("e is not the order bijection from a onto b".into()));
    }
    if !e.is_identity_on_overlap() || !e.is_lower() {
        return Err(Error::Precondition("e must fix a ∩ b and move points upwards".into()));
    }
    Ok(WitnessReport { pair: None, e: e.pairs().collect(), failed_clauses: clause_failures(f, a, b, WitnessMode::Strong) })
}

/// Checks the weak property for the pair `(a, b)`.
pub fn check_bs_witness(f: &PairTable, a: &FinSet, b: &FinSet) -> WitnessReport {
    let e = OrderIso::canonical(a, b).map(|e| e.pairs().collect()).unwrap_or_default();
    WitnessReport { pair: None, e, failed_clauses: clause_failures(f, a, b, WitnessMode::Bs) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WitnessSearch {
    Found(WitnessReport),
    /// No pair witnesses the property; `best` is the admissible pair with
    /// the fewest failed clause instances, if any pair was admissible.
    Absent { best: Option<WitnessReport> },
}

impl WitnessSearch {
    pub fn is_found(&self) -> bool {
        matches!(self, WitnessSearch::Found(_))
    }
}

/// Ordered pairs `(j, k)` of the system, lexicographically, for which a
/// witness is conceivable at all.
fn admissible_pairs(system: &DeltaSystem, mode: WitnessMode) -> Vec<(usize, usize, OrderIso)> {
    let m = system.members();
    let mut out = Vec::new();
    for j in 0..m.len() {
        for k in 0..m.len() {
            if j == k {
                continue;
            }
            let Some(e) = OrderIso::canonical(&m[j], &m[k]) else { continue };
            if mode == WitnessMode::Strong && !(e.is_lower() && e.is_identity_on_overlap()) {
                continue;
            }
            out.push((j, k, e));
        }
    }
    out
}

/// Scans the ordered pairs of `system` in lexicographic order and returns
/// the first witness.
pub fn family_has_witness(f: &PairTable, system: &DeltaSystem, mode: WitnessMode) -> WitnessSearch {
    let mut best: Option<WitnessReport> = None;
    for (j, k, e) in admissible_pairs(system, mode) {
        let failed = clause_failures(f, &system.members[j], &system.members[k], mode);
        let report = WitnessReport { pair: Some((j, k)), e: e.pairs().collect(), failed_clauses: failed };
        if report.ok() {
            return WitnessSearch::Found(report);
        }
        if best.as_ref().is_none_or(|b| report.failed_clauses.len() < b.failed_clauses.len()) {
            best = Some(report);
        }
    }
    WitnessSearch::Absent { best }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { table: PairTable, nodes: u64 },
    /// The node budget ran out before a decision was reached.
    Exhausted { nodes: u64 },
    /// Proven impossible; `system` is the index of an ensemble member for
    /// which no table works.
    Unsatisfiable { system: usize, nodes: u64 },
}

fn check_ensemble(n: u32, ensemble: &[DeltaSystem]) -> Result<()> {
    for sys in ensemble {
        for m in sys.members() {
            if let Some(x) = m.iter().find(|&x| x >= n) {
                return Err(Error::OutOfUniverse { value: x, universe: n });
            }
        }
    }
    Ok(())
}

/// Least table containing `table` that satisfies the three clauses for every
/// chosen `(a, b)`. All clauses are lower bounds below the pair minimum, so
/// the fixed point exists and is reached by iteration.
fn propagate(table: &mut PairTable, chosen: &[(FinSet, FinSet)], mode: WitnessMode) {
    loop {
        let mut changed = false;
        for (a, b) in chosen {
            let root = a.intersection(b);
            let seed = if mode == WitnessMode::Strong { a.clone() } else { root.clone() };
            for xi in a.difference(b).iter() {
                for eta in b.difference(a).iter() {
                    let mut need = seed.below(xi.min(eta));
                    for tau in root.iter() {
                        if tau < xi {
                            need.union_with(table.get(tau, eta));
                        }
                        if tau < eta {
                            need.union_with(table.get(tau, xi));
                        }
                    }
                    if !need.is_subset(table.get(xi, eta)) {
                        table.extend(xi, eta, &need).expect("lower bounds stay below the pair minimum");
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Searches for a pair table on `{0, …, n-1}` such that every Δ-system of
/// the ensemble has a witness.
///
/// The search backtracks over one candidate pair per system (in
/// lexicographic order) and completes each partial choice to the least
/// table satisfying all chosen pairs. Each candidate tried is one node.
/// A system with no admissible pair makes the ensemble unsatisfiable
/// outright.
pub fn search_pair_table(n: u32, ensemble: &[DeltaSystem], mode: WitnessMode, budget: u64) -> Result<SearchOutcome> {
    check_ensemble(n, ensemble)?;
    let candidates: Vec<_> = ensemble.iter().map(|s| admissible_pairs(s, mode)).collect();
    if let Some(system) = candidates.iter().position(Vec::is_empty) {
        return Ok(SearchOutcome::Unsatisfiable { system, nodes: 0 });
    }

    struct Search<'a> {
        ensemble: &'a [DeltaSystem],
        candidates: Vec<Vec<(usize, usize, OrderIso)>>,
        mode: WitnessMode,
        budget: u64,
        nodes: u64,
    }

    enum Step {
        Done(PairTable),
        OutOfBudget,
        Fail,
    }

    impl Search<'_> {
        fn go(&mut self, depth: usize, table: &PairTable, chosen: &mut Vec<(FinSet, FinSet)>) -> Step {
            if depth == self.ensemble.len() {
                let ok = self.ensemble.iter().all(|s| family_has_witness(table, s, self.mode).is_found());
                return if ok { Step::Done(table.clone()) } else { Step::Fail };
            }
            for c in 0..self.candidates[depth].len() {
                if self.nodes >= self.budget {
                    return Step::OutOfBudget;
                }
                self.nodes += 1;
                let (j, k, _) = self.candidates[depth][c];
                let members = self.ensemble[depth].members();
                chosen.push((members[j].clone(), members[k].clone()));
                let mut next = table.clone();
                propagate(&mut next, chosen, self.mode);
                let step = self.go(depth + 1, &next, chosen);
                chosen.pop();
                match step {
                    Step::Fail => continue,
                    other => return other,
                }
            }
            Step::Fail
        }
    }

    let mut search = Search { ensemble, candidates, mode, budget, nodes: 0 };
    let step = search.go(0, &PairTable::new(n), &mut Vec::new());
    Ok(match step {
        Step::Done(table) => SearchOutcome::Found { table, nodes: search.nodes },
        Step::OutOfBudget => SearchOutcome::Exhausted { nodes: search.nodes },
        Step::Fail => SearchOutcome::Unsatisfiable { system: 0, nodes: search.nodes },
    })
}

/// Largest universe accepted by [`brute_force_pair_table`].
pub const BRUTE_FORCE_LIMIT: u32 = 6;

/// Tries every pair table whose nonempty values sit on pairs inside the
/// union of the ensemble's members, smallest bitmask first. Pairs outside
/// that union never enter a clause, so this is exhaustive. Each table tried
/// is one node.
pub fn brute_force_pair_table(n: u32, ensemble: &[DeltaSystem], mode: WitnessMode, budget: u64) -> Result<SearchOutcome> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::BoundExceeded { universe: n, bound: BRUTE_FORCE_LIMIT });
    }
    check_ensemble(n, ensemble)?;
    let support: FinSet = ensemble.iter().flat_map(|s| s.members().iter().flat_map(|m| m.iter())).collect();
    let slots: Vec<(Ordinal, Ordinal, Ordinal)> =
        support.pairs().flat_map(|(x, y)| (0..x).map(move |z| (x, y, z))).collect();
    let mut nodes = 0;
    for mask in 0..1u64 << slots.len() {
        if nodes >= budget {
            return Ok(SearchOutcome::Exhausted { nodes });
        }
        nodes += 1;
        let mut table = PairTable::new(n);
        for (k, &(x, y, z)) in slots.iter().enumerate() {
            if mask >> k & 1 == 1 {
                table.extend(x, y, &FinSet::singleton(z)).expect("slot values lie below the pair minimum");
            }
        }
        if ensemble.iter().all(|s| family_has_witness(&table, s, mode).is_found()) {
            return Ok(SearchOutcome::Found { table, nodes });
        }
    }
    let system = ensemble
        .iter()
        .position(|s| admissible_pairs(s, mode).is_empty())
        .unwrap_or(0);
    Ok(SearchOutcome::Unsatisfiable { system, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs<const N: usize>(a: [Ordinal; N]) -> FinSet {
        FinSet::from(a)
    }

    #[test]
    fn recognizes_delta_systems() {
        let sys = recognize_delta_system(&[fs([0, 2]), fs([0, 3]), fs([0, 5])]).unwrap();
        assert_eq!(sys.root(), &fs([0]));
        assert_eq!(recognize_delta_system(&[fs([0, 2]), fs([0, 3, 4])]), None);
        assert_eq!(recognize_delta_system(&[fs([0, 2]), fs([0, 3]), fs([2, 3])]), None);
        assert_eq!(recognize_delta_system(&[fs([1]), fs([1])]), None);
        assert_eq!(recognize_delta_system(&[]), None);
        assert_eq!(recognize_delta_system(&[fs([4, 7])]).unwrap().root(), &fs([4, 7]));
    }

    #[test]
    fn strong_witness_example() {
        let (a, b) = (fs([0, 1]), fs([0, 2]));
        let e = OrderIso::canonical(&a, &b).unwrap();
        let mut f = PairTable::new(3);
        f.set(1, 2, fs([0])).unwrap();
        assert!(check_strong_witness(&f, &a, &b, &e).unwrap().ok());

        let empty = PairTable::new(3);
        let report = check_strong_witness(&empty, &a, &b, &e).unwrap();
        assert_eq!(report.failed_clauses, vec![ClauseFailure { tau: 0, xi: 1, eta: 2, clause: 1 }]);
        // The weak property only wants the root below the pair, which is {0} too.
        assert!(!check_bs_witness(&empty, &a, &b).ok());
    }

    #[test]
    fn strong_differs_from_weak_below_the_cross_pair() {
        // The root {4} lies above every cross pair, so the weak property
        // holds for any f; the strong one still wants 0 in f({1,2}).
        let (a, b) = (fs([0, 2, 4]), fs([1, 3, 4]));
        let e = OrderIso::canonical(&a, &b).unwrap();
        let mut f = PairTable::new(5);
        f.set(2, 3, fs([0])).unwrap();
        assert!(check_bs_witness(&f, &a, &b).ok());
        let strong = check_strong_witness(&f, &a, &b, &e).unwrap();
        assert!(!strong.ok());
        assert_eq!(strong.failed_clauses, vec![ClauseFailure { tau: 0, xi: 2, eta: 1, clause: 1 }]);
    }

    #[test]
    fn witness_preconditions() {
        let f = PairTable::new(4);
        let (a, b) = (fs([1, 2]), fs([0, 3]));
        let e = OrderIso::canonical(&a, &b).unwrap();
        assert!(check_strong_witness(&f, &a, &b, &e).is_err());
        let wrong = OrderIso::canonical(&a, &a).unwrap();
        assert!(check_strong_witness(&f, &a, &b, &wrong).is_err());
    }

    #[test]
    fn family_scan_reports_the_best_failure() {
        let sys = recognize_delta_system(&[fs([0, 1]), fs([0, 2])]).unwrap();
        let mut f = PairTable::new(3);
        f.set(1, 2, fs([0])).unwrap();
        match family_has_witness(&f, &sys, WitnessMode::Strong) {
            WitnessSearch::Found(r) => assert_eq!(r.pair, Some((0, 1))),
            other => panic!("{other:?}"),
        }
        match family_has_witness(&PairTable::new(3), &sys, WitnessMode::Strong) {
            WitnessSearch::Absent { best: Some(r) } => assert_eq!(r.failed_clauses.len(), 1),
            other => panic!("{other:?}"),
        }
        // Nested pairs: no lower, root-fixing bijection in either direction.
        let nested = recognize_delta_system(&[fs([0, 5]), fs([1, 4]), fs([2, 3])]).unwrap();
        assert_eq!(family_has_witness(&f, &nested, WitnessMode::Strong), WitnessSearch::Absent { best: None });
    }

    #[test]
    fn search_handles_satisfiable_and_unsatisfiable_ensembles() {
        let sys = recognize_delta_system(&[fs([0, 1]), fs([0, 2]), fs([0, 3])]).unwrap();
        let out = search_pair_table(4, std::slice::from_ref(&sys), WitnessMode::Strong, 1000).unwrap();
        let SearchOutcome::Found { table, .. } = out else { panic!("{out:?}") };
        assert!(family_has_witness(&table, &sys, WitnessMode::Strong).is_found());
        assert_eq!(table.get(1, 2), &fs([0]));

        let nested = recognize_delta_system(&[fs([0, 5]), fs([1, 4]), fs([2, 3])]).unwrap();
        let out = search_pair_table(6, &[sys.clone(), nested.clone()], WitnessMode::Strong, 1000).unwrap();
        assert!(matches!(out, SearchOutcome::Unsatisfiable { system: 1, .. }));
        let brute = brute_force_pair_table(6, &[nested], WitnessMode::Strong, 1 << 20).unwrap();
        assert!(matches!(brute, SearchOutcome::Unsatisfiable { .. }));

        assert!(search_pair_table(3, std::slice::from_ref(&sys), WitnessMode::Strong, 10).is_err());
        let out = search_pair_table(4, &[sys], WitnessMode::Strong, 0).unwrap();
        assert_eq!(out, SearchOutcome::Exhausted { nodes: 0 });
    }

    #[test]
    fn brute_force_finds_tables_too() {
        let sys = recognize_delta_system(&[fs([0, 1]), fs([0, 2])]).unwrap();
        let out = brute_force_pair_table(3, std::slice::from_ref(&sys), WitnessMode::Strong, 1 << 10).unwrap();
        let SearchOutcome::Found { table, .. } = out else { panic!("{out:?}") };
        assert!(family_has_witness(&table, &sys, WitnessMode::Strong).is_found());
        assert!(brute_force_pair_table(7, &[sys], WitnessMode::Strong, 1).is_err());
    }

    proptest! {
        #[test]
        fn propagated_tables_satisfy_the_chosen_pairs(
            picks in proptest::collection::vec((0u32..10, 0u32..10, 0u32..10), 1..4)
        ) {
            // Build pairs (a, b) with a lower root-fixing bijection: shared
            // root {r} plus one private point each.
            let mut chosen = Vec::new();
            for (r, x, y) in picks {
                let (x, y) = (x.min(y), x.max(y));
                if r == x || r == y || x == y { continue; }
                chosen.push((fs_from(&[r, x]), fs_from(&[r, y])));
            }
            let mut table = PairTable::new(10);
            propagate(&mut table, &chosen, WitnessMode::Strong);
            for (a, b) in &chosen {
                let e = OrderIso::canonical(a, b).unwrap();
                if e.is_lower() && e.is_identity_on_overlap() {
                    prop_assert!(check_strong_witness(&table, a, b, &e).unwrap().ok());
                }
            }
        }
    }

    fn fs_from(v: &[Ordinal]) -> FinSet {
        v.iter().copied().collect()
    }
}
