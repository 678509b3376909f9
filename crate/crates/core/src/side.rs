//! Side-condition forcing for a pair function with the strong property Δ.
//!
//! Conditions are triples `(a, f, A)`: a finite set `a`, a partial pair
//! function `f` on `[a]²` and a finite set `A` of members of a
//! [`RankedFamily`], subject to
//!
//! ```text
//! f({α, β}) ⊆ min{α, β} ∩ ⋂{X ∈ A : α, β ∈ X}
//! ```
//!
//! (an empty intersection imposes nothing beyond `min{α, β}`). Members are
//! referenced by their index in the family.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::conditions::OrderIso;
use crate::error::{Error, Result};
use crate::pair_table::{PairTable, EMPTY};
use crate::report::ValidationReport;
use crate::set::{pair_key, FinSet, Ordinal};

pub type MemberId = usize;

/// Finitely many subsets of the universe, each with a rank, such that
/// `X ⊊ Y ⇒ rank X < rank Y`, and whenever `α ∈ X ∩ Y` and
/// `rank X ≤ rank Y` we have `X ∩ α ⊆ Y ∩ α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankedFamily {
    universe: u32,
    members: Vec<FinSet>,
    ranks: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyViolation {
    OutOfUniverse { member: MemberId, value: Ordinal },
    DuplicateMember { first: MemberId, second: MemberId },
    /// `smaller ⊊ larger` but the ranks do not increase.
    RankNotIncreasing { smaller: MemberId, larger: MemberId },
    /// `alpha` is in both, `rank lower ≤ rank upper`, and `lower ∩ alpha`
    /// is not contained in `upper ∩ alpha`.
    TraceNotNested { lower: MemberId, upper: MemberId, alpha: Ordinal },
}

impl RankedFamily {
    /// Builds a family without checking it; see [`validate_ranked_family`].
    ///
    /// # Panics
    ///
    /// If `members` and `ranks` have different lengths.
    pub fn new(universe: u32, members: Vec<FinSet>, ranks: Vec<u32>) -> Self {
        assert_eq!(members.len(), ranks.len(), "one rank per member");
        RankedFamily { universe, members, ranks }
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn members(&self) -> &[FinSet] {
        &self.members
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, id: MemberId) -> Option<&FinSet> {
        self.members.get(id)
    }

    pub fn rank(&self, id: MemberId) -> Option<u32> {
        self.ranks.get(id).copied()
    }

    /// Index of the member equal to `set`, if any.
    pub fn find(&self, set: &FinSet) -> Option<MemberId> {
        self.members.iter().position(|m| m == set)
    }
}

pub fn validate_ranked_family(family: &RankedFamily) -> ValidationReport<FamilyViolation> {
    let mut violations = Vec::new();
    let m = &family.members;
    for (k, x) in m.iter().enumerate() {
        if let Some(value) = x.iter().find(|&v| v >= family.universe) {
            violations.push(FamilyViolation::OutOfUniverse { member: k, value });
        }
    }
    for j in 0..m.len() {
        for k in 0..m.len() {
            if j == k {
                continue;
            }
            if j < k && m[j] == m[k] {
                violations.push(FamilyViolation::DuplicateMember { first: j, second: k });
            }
            if m[j] != m[k] && m[j].is_subset(&m[k]) && family.ranks[j] >= family.ranks[k] {
                violations.push(FamilyViolation::RankNotIncreasing { smaller: j, larger: k });
            }
            if family.ranks[j] <= family.ranks[k] {
                for alpha in m[j].intersection(&m[k]).iter() {
                    if !m[j].below(alpha).is_subset(&m[k].below(alpha)) {
                        violations.push(FamilyViolation::TraceNotNested { lower: j, upper: k, alpha });
                    }
                }
            }
        }
    }
    ValidationReport::new(violations)
}

/// A condition `(a, f, A)`. Empty values of `f` are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PCondition {
    a: FinSet,
    f: BTreeMap<(Ordinal, Ordinal), FinSet>,
    members: BTreeSet<MemberId>,
}

impl PCondition {
    pub fn new(a: FinSet, f: BTreeMap<(Ordinal, Ordinal), FinSet>, members: BTreeSet<MemberId>) -> Self {
        let f = f
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|((x, y), v)| (pair_key(x, y), v))
            .collect();
        PCondition { a, f, members }
    }

    pub fn a(&self) -> &FinSet {
        &self.a
    }

    pub fn f(&self, x: Ordinal, y: Ordinal) -> &FinSet {
        self.f.get(&pair_key(x, y)).unwrap_or(&EMPTY)
    }

    pub fn f_entries(&self) -> impl Iterator<Item = ((Ordinal, Ordinal), &FinSet)> {
        self.f.iter().map(|(&k, v)| (k, v))
    }

    pub fn members(&self) -> &BTreeSet<MemberId> {
        &self.members
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PViolation {
    UnknownMember { member: MemberId },
    PairOutsideA { xi: Ordinal, eta: Ordinal },
    ValueNotBelowMin { xi: Ordinal, eta: Ordinal, element: Ordinal },
    ValueOutsideMember { xi: Ordinal, eta: Ordinal, element: Ordinal, member: MemberId },
}

/// `min{α, β} ∩ ⋂{X ∈ members : α, β ∈ X}` for a condition's members.
pub(crate) fn cap(family: &RankedFamily, members: &BTreeSet<MemberId>, x: Ordinal, y: Ordinal) -> FinSet {
    let mut out = FinSet::range(x.min(y));
    for &k in members {
        let m = &family.members[k];
        if m.contains(x) && m.contains(y) {
            out = out.intersection(m);
        }
    }
    out
}

pub fn validate_p_condition(p: &PCondition, family: &RankedFamily) -> ValidationReport<PViolation> {
    let mut violations = Vec::new();
    for &member in &p.members {
        if member >= family.len() {
            violations.push(PViolation::UnknownMember { member });
        }
    }
    if !violations.is_empty() {
        return ValidationReport::new(violations);
    }
    for (&(xi, eta), value) in &p.f {
        if !p.a.contains(xi) || !p.a.contains(eta) {
            violations.push(PViolation::PairOutsideA { xi, eta });
        }
        for element in value.iter().filter(|&z| z >= xi) {
            violations.push(PViolation::ValueNotBelowMin { xi, eta, element });
        }
        for &member in &p.members {
            let m = &family.members[member];
            if m.contains(xi) && m.contains(eta) {
                for element in value.difference(m).iter() {
                    violations.push(PViolation::ValueOutsideMember { xi, eta, element, member });
                }
            }
        }
    }
    ValidationReport::new(violations)
}

/// `a ∪ ⋃ ran f ∪ ⋃ A`.
pub fn supp(p: &PCondition, family: &RankedFamily) -> FinSet {
    let mut out = p.a.clone();
    for v in p.f.values() {
        out.union_with(v);
    }
    for &k in &p.members {
        if let Some(m) = family.member(k) {
            out.union_with(m);
        }
    }
    out
}

/// `p ≤ q`: `a_p ⊇ a_q`, `f_p` agrees with `f_q` on `[a_q]²`, `A_p ⊇ A_q`.
pub fn p_extends(p: &PCondition, q: &PCondition) -> bool {
    q.a.is_subset(&p.a)
        && q.members.is_subset(&p.members)
        && q.a.pairs().all(|(x, y)| p.f(x, y) == q.f(x, y))
}

/// The canonical bijection `π : supp(p) → supp(q)` when it is the identity
/// on the common support and carries `p` onto `q`: `π[a_p] = a_q`,
/// `{π[X] : X ∈ A_p} = {X : X ∈ A_q}` and `f_q ∘ π = π ∘ f_p`.
pub fn p_isomorphic(p: &PCondition, q: &PCondition, family: &RankedFamily) -> Option<OrderIso> {
    let pi = OrderIso::canonical(&supp(p, family), &supp(q, family))?;
    if !pi.is_identity_on_overlap() || pi.apply_set(&p.a)? != q.a {
        return None;
    }
    let image: BTreeSet<FinSet> = p.members.iter().map(|&k| pi.apply_set(&family.members[k])).collect::<Option<_>>()?;
    let target: BTreeSet<FinSet> = q.members.iter().map(|&k| family.members[k].clone()).collect();
    if image != target {
        return None;
    }
    for (x, y) in p.a.pairs() {
        let (px, py) = (pi.apply(x)?, pi.apply(y)?);
        if pi.apply_set(p.f(x, y))? != *q.f(px, py) {
            return None;
        }
    }
    Some(pi)
}

/// `(a_p ∪ a_q, f_p ∪ f_q, A_p ∪ A_q)` for isomorphic `p`, `q`.
///
/// Fails with a precondition error if `pi` is not the isomorphism of
/// [`p_isomorphic`], or if `f_p` and `f_q` disagree on a common pair (which
/// isomorphism alone does not rule out when the common support is not an
/// initial segment of both supports). A union that is not a condition is an
/// [`Error::InvariantFault`].
pub fn amalgamate_p_isomorphic(
    p: &PCondition,
    q: &PCondition,
    pi: &OrderIso,
    family: &RankedFamily,
) -> Result<PCondition> {
    for (name, c) in [("p", p), ("q", q)] {
        if !validate_p_condition(c, family).is_valid() {
            return Err(Error::Precondition(format!("{name} is not a condition")));
        }
    }
    if p_isomorphic(p, q, family).as_ref() != Some(pi) {
        return Err(Error::Precondition("pi is not an isomorphism of the two conditions".into()));
    }
    let mut f = p.f.clone();
    for (&k, v) in &q.f {
        match f.get(&k) {
            Some(w) if w != v => {
                return Err(Error::Precondition(format!(
                    "the conditions disagree on f({{{}, {}}}): {w} versus {v}",
                    k.0, k.1
                )))
            }
            _ => drop(f.insert(k, v.clone())),
        }
    }
    let r = PCondition {
        a: p.a.union(&q.a),
        f,
        members: p.members.union(&q.members).copied().collect(),
    };
    let report = validate_p_condition(&r, family);
    if !report.is_valid() {
        return Err(Error::InvariantFault(format!("amalgam is not a condition: {:?}", report.violations)));
    }
    Ok(r)
}

/// `q ↾ X = (a_q ∩ X, f_q ↾ [a_q ∩ X]², {Y ∈ A_q : Y ⊊ X})`.
pub fn restrict_p(q: &PCondition, x: &FinSet, family: &RankedFamily) -> PCondition {
    PCondition {
        a: q.a.intersection(x),
        f: q.f.iter().filter(|(&(u, v), _)| x.contains(u) && x.contains(v)).map(|(&k, v)| (k, v.clone())).collect(),
        members: q
            .members
            .iter()
            .copied()
            .filter(|&k| family.member(k).is_some_and(|m| m != x && m.is_subset(x)))
            .collect(),
    }
}

/// Input to the strong-Δ amalgamation.
///
/// `q` has `X0` among its members, `s ≤ q ↾ X0` lives inside `X0`, `delta`
/// is the rank of `X0` and `z ⊇ ⋃{X ∩ X0 : X ∈ A_q, rank X < δ}`; points
/// new to `s` avoid the latter union. The sets
/// `a ⊆ a_s` and `b ⊆ a_q` have a lower, root-fixing order bijection, with
/// `a \ b` made of points new to `s` and `b \ a` outside `X0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrongDeltaAmalgamInput {
    pub q: PCondition,
    pub s: PCondition,
    pub a: FinSet,
    pub b: FinSet,
    pub x0: MemberId,
    pub delta: u32,
    pub z: FinSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrongInputViolation {
    InvalidQ { violations: Vec<PViolation> },
    InvalidS { violations: Vec<PViolation> },
    UnknownX0,
    X0NotInQ,
    DeltaNotRankOfX0 { delta: u32, rank: u32 },
    /// `z` misses part of `⋃{X ∩ X0 : X ∈ A_q, rank X < δ}`.
    ZTooSmall { required: FinSet },
    SDoesNotExtendRestriction,
    SupportOutsideX0,
    MemberNotBelowX0 { member: MemberId },
    NewPointInZ { point: Ordinal },
    /// `a \ (b ∩ X0)` must lie in `X0 \ Z`.
    APartOutsideX0MinusZ { point: Ordinal },
    ANotInS,
    BNotInQ,
    BInsideX0NotInA,
    AMinusBMeetsQ,
    BMissesOutside,
    NoLowerBijection,
}

/// Checks every hypothesis of [`amalgamate_p_strong_delta`].
pub fn validate_strong_input(input: &StrongDeltaAmalgamInput, family: &RankedFamily) -> Vec<StrongInputViolation> {
    use StrongInputViolation as V;
    let mut out = Vec::new();
    let rq = validate_p_condition(&input.q, family);
    if !rq.is_valid() {
        out.push(V::InvalidQ { violations: rq.violations });
    }
    let rs = validate_p_condition(&input.s, family);
    if !rs.is_valid() {
        out.push(V::InvalidS { violations: rs.violations });
    }
    let Some(x0) = family.member(input.x0) else {
        out.push(V::UnknownX0);
        return out;
    };
    if !out.is_empty() {
        return out;
    }
    let (q, s) = (&input.q, &input.s);
    if !q.members.contains(&input.x0) {
        out.push(V::X0NotInQ);
    }
    let rank = family.ranks[input.x0];
    if input.delta != rank {
        out.push(V::DeltaNotRankOfX0 { delta: input.delta, rank });
    }
    let mut z = FinSet::new();
    for &k in &q.members {
        if family.ranks[k] < rank {
            z.union_with(&family.members[k].intersection(x0));
        }
    }
    if !z.is_subset(&input.z) {
        out.push(V::ZTooSmall { required: z.clone() });
    }
    if !p_extends(s, &restrict_p(q, x0, family)) {
        out.push(V::SDoesNotExtendRestriction);
    }
    let mut inner = s.a.clone();
    for v in s.f.values() {
        inner.union_with(v);
    }
    if !inner.is_subset(x0) {
        out.push(V::SupportOutsideX0);
    }
    for &k in &s.members {
        let m = &family.members[k];
        if m == x0 || !m.is_subset(x0) {
            out.push(V::MemberNotBelowX0 { member: k });
        }
    }
    for point in s.a.difference(&q.a).iter().filter(|&x| z.contains(x)) {
        out.push(V::NewPointInZ { point });
    }
    let (a, b) = (&input.a, &input.b);
    if !a.is_subset(&s.a) {
        out.push(V::ANotInS);
    }
    if !b.is_subset(&q.a) {
        out.push(V::BNotInQ);
    }
    if !b.intersection(x0).is_subset(a) {
        out.push(V::BInsideX0NotInA);
    }
    for point in a.difference(&b.intersection(x0)).iter() {
        if !x0.contains(point) || input.z.contains(point) {
            out.push(V::APartOutsideX0MinusZ { point });
        }
    }
    if !a.difference(b).is_disjoint(&q.a) {
        out.push(V::AMinusBMeetsQ);
    }
    if a != b && b.difference(x0).is_empty() {
        out.push(V::BMissesOutside);
    }
    match OrderIso::canonical(a, b) {
        Some(e) if e.is_lower() && e.is_identity_on_overlap() => {}
        _ => out.push(V::NoLowerBijection),
    }
    out
}

/// The amalgam `r ≤ q, s`: `a_r = a_q ∪ a_s`, `A_r = A_q ∪ A_s`, `f_r`
/// extends `f_q ∪ f_s`, and for `ξ ∈ a_s \ a_q`, `η ∈ a_q \ a_s`
///
/// ```text
/// f_r({ξ, η}) = [A ∪ B ∪ C] ∩ D
/// A = a ∩ min{ξ, η}
/// B = ⋃{f_s({τ, ξ}) : τ ∈ a ∩ b, τ < η}
/// C = ⋃{f_q({τ, η}) : τ ∈ a ∩ b, τ < ξ}
/// D = min{ξ, η} ∩ ⋂{X ∈ A_q : ξ, η ∈ X, rank X ≥ δ}
/// ```
///
/// Violated hypotheses are reported as a precondition error. The result is
/// validated; failure there is an [`Error::InvariantFault`].
pub fn amalgamate_p_strong_delta(input: &StrongDeltaAmalgamInput, family: &RankedFamily) -> Result<PCondition> {
    let violations = validate_strong_input(input, family);
    if !violations.is_empty() {
        return Err(Error::Precondition(format!("strong amalgamation hypotheses fail: {violations:?}")));
    }
    let (q, s) = (&input.q, &input.s);
    let root = input.a.intersection(&input.b);
    let mut f = q.f.clone();
    f.extend(s.f.iter().map(|(&k, v)| (k, v.clone())));
    for xi in s.a.difference(&q.a).iter() {
        for eta in q.a.difference(&s.a).iter() {
            let bound = xi.min(eta);
            let mut value = input.a.below(bound);
            for tau in root.iter() {
                if tau < eta {
                    value.union_with(s.f(tau, xi));
                }
                if tau < xi {
                    value.union_with(q.f(tau, eta));
                }
            }
            let mut d = FinSet::range(bound);
            for &k in &q.members {
                let m = &family.members[k];
                if family.ranks[k] >= input.delta && m.contains(xi) && m.contains(eta) {
                    d = d.intersection(m);
                }
            }
            let value = value.intersection(&d);
            if !value.is_empty() {
                f.insert(pair_key(xi, eta), value);
            }
        }
    }
    let r = PCondition { a: q.a.union(&s.a), f, members: q.members.union(&s.members).copied().collect() };
    let report = validate_p_condition(&r, family);
    if !report.is_valid() {
        return Err(Error::InvariantFault(format!("strong amalgam is not a condition: {:?}", report.violations)));
    }
    Ok(r)
}

/// The pair table `⋃ f_p` of a descending chain `p₀ ≥ p₁ ≥ …`.
pub fn extract_pair_table(chain: &[PCondition], n: u32) -> Result<PairTable> {
    for (k, w) in chain.windows(2).enumerate() {
        if !p_extends(&w[1], &w[0]) {
            return Err(Error::NotAChain { position: k + 1 });
        }
    }
    let mut table = PairTable::new(n);
    for p in chain {
        for (&(x, y), v) in &p.f {
            table.extend(x, y, v)?;
        }
    }
    Ok(table)
}
