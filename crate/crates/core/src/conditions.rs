//! Conditions `p = (D, h, i)` of the finite-condition poset, its order,
//! isomorphism of conditions and the `δ₂` projection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pair_table::{PairTable, EMPTY};
use crate::report::ValidationReport;
use crate::set::{pair_key, star, FinSet, Ordinal};

/// A finite condition: a domain `D`, neighborhoods `h(ξ) ⊆ D` with
/// `max h(ξ) = ξ`, and witnesses `i({ξ, η}) ⊆ f({ξ, η}) ∩ D` covering
/// `h(ξ) * h(η)`.
///
/// The value is only a candidate until [`validate_condition`] accepts it.
/// Empty `i` values are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    universe: u32,
    domain: FinSet,
    h: BTreeMap<Ordinal, FinSet>,
    i: BTreeMap<(Ordinal, Ordinal), FinSet>,
}

impl Condition {
    /// A condition with the given domain, `h(ξ) = {ξ}` and `i ≡ ∅`.
    pub fn discrete(universe: u32, domain: FinSet) -> Self {
        let h = domain.iter().map(|x| (x, FinSet::singleton(x))).collect();
        Condition { universe, domain, h, i: BTreeMap::new() }
    }

    pub fn from_parts(
        universe: u32,
        domain: FinSet,
        h: BTreeMap<Ordinal, FinSet>,
        i: BTreeMap<(Ordinal, Ordinal), FinSet>,
    ) -> Self {
        let i = i
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|((x, y), v)| (pair_key(x, y), v))
            .collect();
        Condition { universe, domain, h, i }
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn domain(&self) -> &FinSet {
        &self.domain
    }

    /// `h(ξ)`, or `∅` when `ξ` has no entry.
    pub fn h(&self, x: Ordinal) -> &FinSet {
        self.h.get(&x).unwrap_or(&EMPTY)
    }

    pub fn i(&self, x: Ordinal, y: Ordinal) -> &FinSet {
        self.i.get(&pair_key(x, y)).unwrap_or(&EMPTY)
    }

    pub fn h_entries(&self) -> impl Iterator<Item = (Ordinal, &FinSet)> {
        self.h.iter().map(|(&k, v)| (k, v))
    }

    /// Nonempty `i` entries in lexicographic pair order.
    pub fn i_entries(&self) -> impl Iterator<Item = ((Ordinal, Ordinal), &FinSet)> {
        self.i.iter().map(|(&k, v)| (k, v))
    }

    pub fn set_h(&mut self, x: Ordinal, value: FinSet) {
        self.h.insert(x, value);
    }

    pub fn set_i(&mut self, x: Ordinal, y: Ordinal, value: FinSet) {
        let key = pair_key(x, y);
        if value.is_empty() {
            self.i.remove(&key);
        } else {
            self.i.insert(key, value);
        }
    }
}

/// One violated clause of the definition of a condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionViolation {
    OutOfUniverse { value: Ordinal },
    MissingH { xi: Ordinal },
    StrayH { xi: Ordinal },
    HOutsideDomain { xi: Ordinal, element: Ordinal },
    /// `max h(ξ) ≠ ξ`; `max` is absent for an empty neighborhood.
    MaxMismatch { xi: Ordinal, max: Option<Ordinal> },
    StrayI { xi: Ordinal, eta: Ordinal },
    IOutsideDomain { xi: Ordinal, eta: Ordinal, element: Ordinal },
    /// `ζ ∈ h(ξ) * h(η)` is not covered by `⋃{h(γ) : γ ∈ i({ξ, η})}`.
    /// `clause` is `"3a"` when `ξ ∈ h(η)` and `"3b"` otherwise.
    Uncovered { xi: Ordinal, eta: Ordinal, zeta: Ordinal, clause: &'static str },
    /// `ζ ∈ i({ξ, η})` but `ζ ∉ f({ξ, η})`.
    WitnessOutsideF { xi: Ordinal, eta: Ordinal, zeta: Ordinal },
}

/// Checks every clause of the definition of a condition against `f` and
/// lists all violations.
pub fn validate_condition(p: &Condition, f: &PairTable) -> ValidationReport<ConditionViolation> {
    use ConditionViolation::*;
    let mut out = Vec::new();
    let d = p.domain();

    for x in d.iter().filter(|&x| x >= p.universe) {
        out.push(OutOfUniverse { value: x });
    }
    for (x, _) in p.h_entries().filter(|&(x, _)| !d.contains(x)) {
        out.push(StrayH { xi: x });
    }
    let mut max_ok = BTreeMap::new();
    for x in d.iter() {
        let Some(hx) = p.h.get(&x) else {
            out.push(MissingH { xi: x });
            max_ok.insert(x, false);
            continue;
        };
        for element in hx.iter().filter(|&z| !d.contains(z)) {
            out.push(HOutsideDomain { xi: x, element });
        }
        let ok = hx.max() == Some(x);
        if !ok {
            out.push(MaxMismatch { xi: x, max: hx.max() });
        }
        max_ok.insert(x, ok);
    }
    for ((x, y), v) in p.i_entries() {
        if !(d.contains(x) && d.contains(y)) || x == y {
            out.push(StrayI { xi: x, eta: y });
            continue;
        }
        for element in v.iter().filter(|&z| !d.contains(z)) {
            out.push(IOutsideDomain { xi: x, eta: y, element });
        }
    }

    for (x, y) in d.pairs() {
        let witnesses = p.i(x, y);
        if max_ok[&x] && max_ok[&y] {
            let starred = star(p.h(x), p.h(y)).expect("maxima checked above");
            let cover: FinSet = witnesses
                .iter()
                .fold(FinSet::new(), |acc, g| acc.union(p.h(g)));
            let clause = if p.h(y).contains(x) { "3a" } else { "3b" };
            for zeta in starred.difference(&cover).iter() {
                out.push(Uncovered { xi: x, eta: y, zeta, clause });
            }
        }
        for zeta in witnesses.difference(f.get(x, y)).iter() {
            out.push(WitnessOutsideF { xi: x, eta: y, zeta });
        }
    }
    ValidationReport::new(out)
}

/// `p ≤ q`: `D_p ⊇ D_q`, `h_p(ξ) ∩ D_q = h_q(ξ)` on `D_q`, and `i_p` agrees
/// with `i_q` on `[D_q]²`.
pub fn extends(p: &Condition, q: &Condition) -> bool {
    let dq = q.domain();
    dq.is_subset(p.domain())
        && dq.iter().all(|x| &p.h(x).intersection(dq) == q.h(x))
        && dq.pairs().all(|(x, y)| p.i(x, y) == q.i(x, y))
}

/// An order-preserving bijection between two finite sets of equal size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderIso {
    source: FinSet,
    target: FinSet,
}

impl OrderIso {
    /// The unique order bijection `source → target`, if the sizes agree.
    pub fn canonical(source: &FinSet, target: &FinSet) -> Option<Self> {
        (source.len() == target.len())
            .then(|| OrderIso { source: source.clone(), target: target.clone() })
    }

    pub fn identity(set: &FinSet) -> Self {
        OrderIso { source: set.clone(), target: set.clone() }
    }

    pub fn source(&self) -> &FinSet {
        &self.source
    }

    pub fn target(&self) -> &FinSet {
        &self.target
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Ordinal, Ordinal)> + '_ {
        self.source.iter().zip(self.target.iter())
    }

    pub fn apply(&self, x: Ordinal) -> Option<Ordinal> {
        self.source.position(x).map(|k| self.target.as_slice()[k])
    }

    pub fn apply_set(&self, s: &FinSet) -> Option<FinSet> {
        s.iter().map(|x| self.apply(x)).collect()
    }

    /// `e⁻¹[s]`: the source elements mapped into `s`.
    pub fn preimage(&self, s: &FinSet) -> FinSet {
        self.pairs().filter(|&(_, y)| s.contains(y)).map(|(x, _)| x).collect()
    }

    pub fn inverse(&self) -> OrderIso {
        OrderIso { source: self.target.clone(), target: self.source.clone() }
    }

    /// `ξ ≤ e(ξ)` for every `ξ` in the source.
    pub fn is_lower(&self) -> bool {
        self.pairs().all(|(x, y)| x <= y)
    }

    pub fn is_identity_on_overlap(&self) -> bool {
        self.pairs()
            .all(|(x, y)| !self.target.contains(x) || x == y)
            && self.pairs().all(|(x, y)| !self.source.contains(y) || x == y)
    }
}

/// The isomorphism between two conditions: the order bijection of the
/// domains, provided it fixes `D₁ ∩ D₂` and carries `ξ ∈ h₁(η)` exactly to
/// `e(ξ) ∈ h₂(e(η))`. Query [`OrderIso::is_lower`] for the lower relation.
pub fn find_isomorphism(p1: &Condition, p2: &Condition) -> Option<OrderIso> {
    let e = OrderIso::canonical(p1.domain(), p2.domain())?;
    if !e.is_identity_on_overlap() {
        return None;
    }
    let preserved = e.pairs().all(|(eta, e_eta)| {
        e.pairs()
            .all(|(xi, e_xi)| p1.h(eta).contains(xi) == p2.h(e_eta).contains(e_xi))
    });
    preserved.then_some(e)
}

/// `δ₂(η) = min{δ ∈ D₁ ∩ D₂ : η ∈ h₂(δ)}`, defined for those `η ∈ D₂` that
/// some overlap neighborhood captures.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Delta2Map {
    values: BTreeMap<Ordinal, Ordinal>,
}

impl Delta2Map {
    pub fn domain(&self) -> FinSet {
        self.values.keys().copied().collect()
    }

    pub fn get(&self, x: Ordinal) -> Option<Ordinal> {
        self.values.get(&x).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ordinal, Ordinal)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `δ₂⁻¹[s]`.
    pub fn preimage(&self, s: &FinSet) -> FinSet {
        self.iter().filter(|&(_, d)| s.contains(d)).map(|(x, _)| x).collect()
    }

    pub fn as_map(&self) -> &BTreeMap<Ordinal, Ordinal> {
        &self.values
    }
}

pub fn delta2(p1: &Condition, p2: &Condition) -> Delta2Map {
    let overlap = p1.domain().intersection(p2.domain());
    let values = p2
        .domain()
        .iter()
        .filter_map(|eta| {
            overlap
                .iter()
                .find(|&delta| p2.h(delta).contains(eta))
                .map(|delta| (eta, delta))
        })
        .collect();
    Delta2Map { values }
}

/// Checks `h₂(ξ) = δ₂⁻¹[h₁(ξ)]` for every `ξ ∈ D₁ ∩ D₂`. This identity holds
/// for every isomorphic pair of conditions; `e` must be the bijection
/// `D₁ → D₂`.
pub fn check_projection(p1: &Condition, p2: &Condition, e: &OrderIso) -> Result<bool> {
    if e.source() != p1.domain() || e.target() != p2.domain() {
        return Err(Error::Precondition("e must map D1 onto D2".into()));
    }
    let d2 = delta2(p1, p2);
    let overlap = p1.domain().intersection(p2.domain());
    let holds = overlap.iter().all(|x| p2.h(x) == &d2.preimage(p1.h(x)));
    Ok(holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cond(universe: u32, h: &[(Ordinal, &[Ordinal])], i: &[((Ordinal, Ordinal), &[Ordinal])]) -> Condition {
        let domain: FinSet = h.iter().map(|&(x, _)| x).collect();
        let h = h.iter().map(|&(x, v)| (x, v.iter().copied().collect())).collect();
        let i = i.iter().map(|&(k, v)| (k, v.iter().copied().collect())).collect();
        Condition::from_parts(universe, domain, h, i)
    }

    #[test]
    fn valid_two_point_condition() {
        let p = cond(3, &[(0, &[0]), (2, &[0, 2])], &[]);
        assert!(validate_condition(&p, &PairTable::new(3)).is_valid());
    }

    #[test]
    fn uncovered_intersection_is_reported_with_witness() {
        // h(1) ∩ h(2) = {0} because 1 ∉ h(2), and nothing covers it.
        let p = cond(3, &[(0, &[0]), (1, &[0, 1]), (2, &[0, 2])], &[]);
        let report = validate_condition(&p, &PairTable::new(3));
        assert_eq!(
            report.violations,
            vec![ConditionViolation::Uncovered { xi: 1, eta: 2, zeta: 0, clause: "3b" }]
        );
    }

    #[test]
    fn covering_witness_inside_f_repairs_it() {
        let p = cond(3, &[(0, &[0]), (1, &[0, 1]), (2, &[0, 2])], &[((1, 2), &[0])]);
        let mut f = PairTable::new(3);
        assert_eq!(
            validate_condition(&p, &f).violations,
            vec![ConditionViolation::WitnessOutsideF { xi: 1, eta: 2, zeta: 0 }]
        );
        f.set(1, 2, FinSet::from([0])).unwrap();
        assert!(validate_condition(&p, &f).is_valid());
    }

    #[test]
    fn structural_faults_are_reported_not_thrown() {
        let mut p = cond(3, &[(0, &[0]), (2, &[1, 2])], &[((0, 2), &[1])]);
        p.set_h(5, FinSet::from([5]));
        let v = validate_condition(&p, &PairTable::new(3)).violations;
        assert!(v.contains(&ConditionViolation::StrayH { xi: 5 }));
        assert!(v.contains(&ConditionViolation::HOutsideDomain { xi: 2, element: 1 }));
        assert!(v.contains(&ConditionViolation::IOutsideDomain { xi: 0, eta: 2, element: 1 }));
        let q = Condition::from_parts(3, FinSet::from([1]), BTreeMap::new(), BTreeMap::new());
        assert_eq!(validate_condition(&q, &PairTable::new(3)).violations, vec![ConditionViolation::MissingH { xi: 1 }]);
        let r = cond(3, &[(1, &[0])], &[]);
        assert!(validate_condition(&r, &PairTable::new(3))
            .violations
            .contains(&ConditionViolation::MaxMismatch { xi: 1, max: Some(0) }));
    }

    #[test]
    fn order_clauses() {
        let p = cond(3, &[(0, &[0]), (1, &[0, 1]), (2, &[0, 1, 2])], &[((1, 2), &[0])]);
        let old = cond(3, &[(0, &[0]), (2, &[0, 2])], &[]);
        assert!(extends(&p, &p));
        assert!(extends(&p, &old));
        assert!(!extends(&old, &p));
        let mut bigger = p.clone();
        bigger.set_h(2, FinSet::from([2]));
        assert!(!extends(&bigger, &old));
        let mut other_i = old.clone();
        other_i.set_i(0, 2, FinSet::from([0]));
        assert!(!extends(&p, &other_i));
    }

    #[test]
    fn isomorphism_examples() {
        let p1 = cond(3, &[(0, &[0]), (1, &[0, 1])], &[]);
        let p2 = cond(3, &[(0, &[0]), (2, &[0, 2])], &[]);
        let id = find_isomorphism(&p1, &p1).unwrap();
        assert!(id.is_lower());
        assert_eq!(id, OrderIso::identity(p1.domain()));

        let e = find_isomorphism(&p1, &p2).unwrap();
        assert_eq!(e.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
        assert!(e.is_lower());
        assert_eq!(find_isomorphism(&p2, &p1).unwrap(), e.inverse());
        assert!(!e.inverse().is_lower());

        let p3 = cond(3, &[(0, &[0]), (2, &[2])], &[]);
        assert!(find_isomorphism(&p1, &p3).is_none());
        let p4 = cond(3, &[(2, &[2])], &[]);
        assert!(find_isomorphism(&p1, &p4).is_none());
    }

    #[test]
    fn overlap_must_be_fixed() {
        // {1,5} → {0,1} sends the shared point 1 to 0.
        let p1 = cond(6, &[(1, &[1]), (5, &[5])], &[]);
        let p2 = cond(6, &[(0, &[0]), (1, &[1])], &[]);
        assert!(find_isomorphism(&p1, &p2).is_none());
    }

    #[test]
    fn delta2_examples() {
        let p1 = cond(4, &[(1, &[1])], &[]);
        let p2 = cond(4, &[(3, &[3])], &[]);
        assert!(delta2(&p1, &p2).is_empty());

        let p1 = cond(4, &[(0, &[0]), (2, &[2])], &[]);
        let p2 = cond(4, &[(0, &[0]), (3, &[0, 3])], &[]);
        let d = delta2(&p1, &p2);
        assert_eq!(d.domain(), FinSet::from([0]));
        assert_eq!(d.get(0), Some(0));

        let p1 = cond(5, &[(2, &[2]), (4, &[4])], &[]);
        let p2 = cond(5, &[(1, &[1]), (2, &[1, 2])], &[]);
        let d = delta2(&p1, &p2);
        assert_eq!(d.get(1), Some(2));
        assert_eq!(d.get(2), Some(2));
    }

    #[test]
    fn projection_examples() {
        let p1 = cond(3, &[(0, &[0]), (1, &[0, 1])], &[]);
        let p2 = cond(3, &[(0, &[0]), (2, &[0, 2])], &[]);
        let e = find_isomorphism(&p1, &p2).unwrap();
        assert!(check_projection(&p1, &p2, &e).unwrap());

        let q1 = cond(4, &[(0, &[0])], &[]);
        let q2 = cond(4, &[(3, &[3])], &[]);
        let e = OrderIso::canonical(q1.domain(), q2.domain()).unwrap();
        assert!(check_projection(&q1, &q2, &e).unwrap());

        // h₂(2) gains 0 although 0 ∉ h₁(2) and δ₂(0) = 0.
        let r1 = cond(4, &[(0, &[0]), (2, &[2])], &[]);
        let mut r2 = r1.clone();
        r2.set_h(2, FinSet::from([0, 2]));
        let e = OrderIso::identity(r1.domain());
        assert!(!check_projection(&r1, &r2, &e).unwrap());
        assert!(check_projection(&r1, &r2, &OrderIso::identity(&FinSet::from([0]))).is_err());
    }
}
