//! Asymmetric amalgamation of a lower condition with an isomorphic copy.
//!
//! Given isomorphic conditions `p₁`, `p₂` with `p₁` lower than `p₂` via `e`,
//! the amalgam `q` has domain `D₁ ∪ D₂` and
//!
//! ```text
//! h_q(ξ) = h₁(ξ) ∪ δ₂⁻¹[h₁(ξ)]   for ξ ∈ D₁
//! h_q(ξ) = h₂(ξ) ∪ e⁻¹[h₂(ξ)]    for ξ ∈ D₂
//! i_q    = i₁ on [D₁]², i₂ on [D₂]², f ∩ D_q on the remaining pairs
//! ```
//!
//! so that `ξ ∈ h_q(η) ⟺ e(ξ) ∈ h₂(η)` for `ξ ∈ D₁`, `η ∈ D₂`. The pair
//! function `f` has to satisfy the hypotheses checked by
//! [`check_amalgam_hypotheses`].

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::conditions::{delta2, find_isomorphism, validate_condition, Condition, OrderIso};
use crate::error::{Error, Result};
use crate::pair_table::PairTable;
use crate::set::{star, FinSet, Ordinal};

/// Which hypothesis a cross-pair failure belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HypothesisClause {
    /// `ζ < ξ ⇒ f({ζ, η}) ⊆ f({ξ, η})`.
    #[serde(rename = "B(i)")]
    BiForward,
    /// `ζ < η ⇒ f({ζ, ξ}) ⊆ f({ξ, η})`, the same inclusion with the roles
    /// of the two cross points exchanged.
    #[serde(rename = "B(i)-swapped")]
    BiSwapped,
    /// `D₁ ∩ ξ ∩ η ⊆ f({ξ, η})`; the reported `ζ` is a missing element.
    #[serde(rename = "B(ii)")]
    Bii,
}

/// A failed cross-pair hypothesis, with `ξ ∈ D₁ \ D₂` and `η ∈ D₂ \ D₁`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisFailure {
    pub zeta: Ordinal,
    pub xi: Ordinal,
    pub eta: Ordinal,
    pub clause: HypothesisClause,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmalgamHypotheses {
    /// `i₁ = i₂` on `[D₁ ∩ D₂]²`.
    pub cond_a_ok: bool,
    /// Overlap pairs on which `i₁` and `i₂` differ.
    pub cond_a_failures: Vec<(Ordinal, Ordinal)>,
    pub cond_b_failures: Vec<HypothesisFailure>,
}

impl AmalgamHypotheses {
    pub fn hold(&self) -> bool {
        self.cond_a_ok && self.cond_b_failures.is_empty()
    }
}

impl fmt::Display for AmalgamHypotheses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} overlap pair(s) break (A), {} cross instance(s) break (B)",
            self.cond_a_failures.len(),
            self.cond_b_failures.len()
        )
    }
}

fn require_lower_isomorphism(p1: &Condition, p2: &Condition, e: &OrderIso) -> Result<()> {
    match find_isomorphism(p1, p2) {
        Some(ref iso) if iso == e => {}
        _ => {
            return Err(Error::Precondition(
                "e is not an isomorphism between the two conditions".into(),
            ))
        }
    }
    if !e.is_lower() {
        return Err(Error::Precondition("the first condition is not lower than the second".into()));
    }
    Ok(())
}

/// Evaluates hypotheses (A) and (B) exhaustively. Every cross pair
/// `ξ ∈ D₁ \ D₂`, `η ∈ D₂ \ D₁` is checked against every `ζ ∈ D₁ ∩ D₂`, with
/// the monotonicity clause taken in both orientations.
pub fn check_amalgam_hypotheses(
    p1: &Condition,
    p2: &Condition,
    e: &OrderIso,
    f: &PairTable,
) -> Result<AmalgamHypotheses> {
    require_lower_isomorphism(p1, p2, e)?;
    let (d1, d2) = (p1.domain(), p2.domain());
    let overlap = d1.intersection(d2);

    let cond_a_failures: Vec<_> = overlap.pairs().filter(|&(x, y)| p1.i(x, y) != p2.i(x, y)).collect();

    let mut cond_b_failures = Vec::new();
    for xi in d1.difference(d2).iter() {
        for eta in d2.difference(d1).iter() {
            let target = f.get(xi, eta);
            for zeta in overlap.iter() {
                if zeta < xi && !f.get(zeta, eta).is_subset(target) {
                    cond_b_failures.push(HypothesisFailure { zeta, xi, eta, clause: HypothesisClause::BiForward });
                }
                if zeta < eta && !f.get(zeta, xi).is_subset(target) {
                    cond_b_failures.push(HypothesisFailure { zeta, xi, eta, clause: HypothesisClause::BiSwapped });
                }
            }
            let bound = xi.min(eta);
            for zeta in d1.below(bound).difference(target).iter() {
                cond_b_failures.push(HypothesisFailure { zeta, xi, eta, clause: HypothesisClause::Bii });
            }
        }
    }
    Ok(AmalgamHypotheses { cond_a_ok: cond_a_failures.is_empty(), cond_a_failures, cond_b_failures })
}

/// Builds the asymmetric amalgam `q ≤ p₁, p₂`.
///
/// Fails with [`Error::Precondition`] if either input is not a condition or
/// `e` is not a lower isomorphism, and with [`Error::Hypotheses`] if (A) or
/// (B) fails. The two formulas for `h_q` on `D₁ ∩ D₂` are compared and a
/// mismatch is an [`Error::InvariantFault`].
pub fn amalgamate_asymmetric(
    p1: &Condition,
    p2: &Condition,
    e: &OrderIso,
    f: &PairTable,
) -> Result<Condition> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        let report = validate_condition(p, f);
        if !report.is_valid() {
            return Err(Error::Precondition(format!(
                "{name} is not a condition ({} violation(s))",
                report.violations.len()
            )));
        }
    }
    if p1.universe() != p2.universe() {
        return Err(Error::Precondition("conditions live in different universes".into()));
    }
    let hypotheses = check_amalgam_hypotheses(p1, p2, e, f)?;
    if !hypotheses.hold() {
        return Err(Error::Hypotheses(Box::new(hypotheses)));
    }

    let (d1, d2) = (p1.domain(), p2.domain());
    let dq = d1.union(d2);
    let d2map = delta2(p1, p2);

    let mut h = BTreeMap::new();
    for x in dq.iter() {
        let from_first = d1.contains(x).then(|| p1.h(x).union(&d2map.preimage(p1.h(x))));
        let from_second = d2.contains(x).then(|| p2.h(x).union(&e.preimage(p2.h(x))));
        let hx = match (from_first, from_second) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvariantFault(format!(
                    "h_q({x}) is {a} from the first condition but {b} from the second"
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("x ranges over D1 ∪ D2"),
        };
        h.insert(x, hx);
    }

    let mut i = BTreeMap::new();
    for (x, y) in dq.pairs() {
        let value = if d1.contains(x) && d1.contains(y) {
            p1.i(x, y).clone()
        } else if d2.contains(x) && d2.contains(y) {
            p2.i(x, y).clone()
        } else {
            f.get(x, y).intersection(&dq)
        };
        i.insert((x, y), value);
    }
    Ok(Condition::from_parts(p1.universe(), dq, h, i))
}

/// Checks the star-projection identities for `p`, a candidate `(D_q, h_q)`
/// and a partial map `g : dom(g) → D_p`: for all `ξ < η` in `D_p`,
///
/// ```text
/// (h_q(ξ) * h_q(η)) ∩ D_p         = h_p(ξ) * h_p(η)
/// (h_q(ξ) * h_q(η)) ∩ (D_q \ D_p) = g⁻¹[h_p(ξ) * h_p(η)] ∩ (D_q \ D_p)
/// ```
///
/// Structural hypotheses (`D_p ⊆ D_q`, `dom(g) ⊆ D_q`, `g` into `D_p` and the
/// identity on `D_p ∩ dom(g)`, `h_q` defined on `D_p` with the right maxima)
/// are errors. The verdict is `false` when `h_q(ξ) ≠ h_p(ξ) ∪ g⁻¹[h_p(ξ)]`
/// for some `ξ ∈ D_p`, or when an identity fails.
pub fn check_star_projection(
    p: &Condition,
    q_domain: &FinSet,
    q_h: &BTreeMap<Ordinal, FinSet>,
    g: &BTreeMap<Ordinal, Ordinal>,
) -> Result<bool> {
    let dp = p.domain();
    if !dp.is_subset(q_domain) {
        return Err(Error::Precondition("D_p is not contained in D_q".into()));
    }
    for (&x, &y) in g {
        if !q_domain.contains(x) || !dp.contains(y) {
            return Err(Error::Precondition(format!("g({x}) = {y} does not map D_q into D_p")));
        }
        if dp.contains(x) && x != y {
            return Err(Error::Precondition(format!("g moves {x}, a point of D_p")));
        }
    }
    for x in dp.iter() {
        match q_h.get(&x) {
            Some(hx) if hx.max() == Some(x) => {}
            _ => return Err(Error::Precondition(format!("h_q({x}) is missing or has the wrong maximum"))),
        }
    }

    let preimage = |s: &FinSet| -> FinSet { g.iter().filter(|&(_, y)| s.contains(*y)).map(|(&x, _)| x).collect() };
    let defined_from_p = dp.iter().all(|x| q_h[&x] == p.h(x).union(&preimage(p.h(x))));
    if !defined_from_p {
        return Ok(false);
    }
    let outside = q_domain.difference(dp);
    for (x, y) in dp.pairs() {
        let in_q = star(&q_h[&x], &q_h[&y])?;
        let in_p = star(p.h(x), p.h(y))?;
        if in_q.intersection(dp) != in_p {
            return Ok(false);
        }
        if in_q.intersection(&outside) != preimage(&in_p).intersection(&outside) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of triples `(ξ, η, ζ)` with `ξ < η` in `D_q` and
/// `ζ ∈ h_q(ξ) * h_q(η)`, split by where `ξ` and `η` live. These are the
/// cases of the validity argument for the amalgam.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseCoverage {
    /// Both points in `D₁ ∩ D₂`.
    pub overlap: usize,
    /// Both in `D₁`, not both in the overlap.
    pub both_in_first: usize,
    /// Both in `D₂`, not both in the overlap.
    pub both_in_second: usize,
    /// `ξ ∈ D₁ \ D₂`, `η ∈ D₂ \ D₁`.
    pub split_first_second: usize,
    /// `ξ ∈ D₂ \ D₁`, `η ∈ D₁ \ D₂`.
    pub split_second_first: usize,
    /// Split second/first with `ζ ∈ D₂ \ D₁` and `θ < ξ`, where `θ` is the
    /// least `δ₂`-value of `ζ` and `ξ`.
    pub theta_below: usize,
    /// As above with `θ > ξ`.
    pub theta_above: usize,
}

impl CaseCoverage {
    pub fn add(&mut self, other: &CaseCoverage) {
        self.overlap += other.overlap;
        self.both_in_first += other.both_in_first;
        self.both_in_second += other.both_in_second;
        self.split_first_second += other.split_first_second;
        self.split_second_first += other.split_second_first;
        self.theta_below += other.theta_below;
        self.theta_above += other.theta_above;
    }

    pub fn all_hit(&self) -> bool {
        [
            self.overlap,
            self.both_in_first,
            self.both_in_second,
            self.split_first_second,
            self.split_second_first,
            self.theta_below,
            self.theta_above,
        ]
        .iter()
        .all(|&n| n > 0)
    }
}

/// Classifies the nonempty `*`-sets of an amalgam `q` of `p₁` and `p₂`.
pub fn case_coverage(p1: &Condition, p2: &Condition, q: &Condition) -> CaseCoverage {
    let (d1, d2) = (p1.domain(), p2.domain());
    let d2map = delta2(p1, p2);
    let mut cov = CaseCoverage::default();
    for (x, y) in q.domain().pairs() {
        let Ok(starred) = star(q.h(x), q.h(y)) else { continue };
        let hits = starred.len();
        if hits == 0 {
            continue;
        }
        let (x1, x2, y1, y2) = (d1.contains(x), d2.contains(x), d1.contains(y), d2.contains(y));
        if x1 && x2 && y1 && y2 {
            cov.overlap += hits;
        } else if x1 && y1 {
            cov.both_in_first += hits;
        } else if x2 && y2 {
            cov.both_in_second += hits;
        } else if x1 {
            cov.split_first_second += hits;
        } else {
            cov.split_second_first += hits;
            for zeta in starred.iter().filter(|&z| !d1.contains(z)) {
                let theta = [zeta, x].iter().filter_map(|&w| d2map.get(w)).min();
                match theta {
                    Some(t) if t < x => cov.theta_below += 1,
                    Some(t) if t > x => cov.theta_above += 1,
                    _ => {}
                }
            }
        }
    }
    cov
}
