//! Finite approximations of the generic space.
//!
//! Merging a descending chain of conditions gives a partial picture of the
//! space: `h(ξ)` is the compact open neighborhood of `ξ`, basic open sets
//! are `h(ξ) \ ⋃_{η ∈ F} h(η)`, and the Cantor–Bendixson level of `ξ` is
//! computed from the inclusion structure of the `h`-sets.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amalgamation::amalgamate_asymmetric;
use crate::conditions::{extends, find_isomorphism, validate_condition, Condition, ConditionViolation, OrderIso};
use crate::error::{Error, Result};
use crate::pair_table::PairTable;
use crate::report::ValidationReport;
use crate::set::{FinSet, Ordinal};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainViolation {
    Empty,
    InvalidCondition { position: usize, violations: Vec<ConditionViolation> },
    /// `chain[position]` does not extend `chain[position - 1]`.
    NotExtending { position: usize },
}

/// Checks that `chain` is a nonempty descending sequence of conditions.
pub fn validate_chain(chain: &[Condition], f: &PairTable) -> ValidationReport<ChainViolation> {
    if chain.is_empty() {
        return ValidationReport::new(vec![ChainViolation::Empty]);
    }
    let mut violations = Vec::new();
    for (position, p) in chain.iter().enumerate() {
        let report = validate_condition(p, f);
        if !report.is_valid() {
            violations.push(ChainViolation::InvalidCondition { position, violations: report.violations });
        }
        if position > 0 && !extends(p, &chain[position - 1]) {
            violations.push(ChainViolation::NotExtending { position });
        }
    }
    ValidationReport::new(violations)
}

/// The pointwise union of the `h`-functions of some conditions. The
/// compactification point is only flagged: it has no neighborhood data here.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenericApproximation {
    universe: u32,
    h: BTreeMap<Ordinal, FinSet>,
    has_infinity: bool,
}

impl GenericApproximation {
    /// Pointwise union, without checking that the conditions are
    /// compatible.
    pub fn union_of<'a>(conditions: impl IntoIterator<Item = &'a Condition>) -> Self {
        let mut h: BTreeMap<Ordinal, FinSet> = BTreeMap::new();
        let mut universe = 0;
        for p in conditions {
            universe = universe.max(p.universe());
            for (x, hx) in p.h_entries() {
                h.entry(x).or_default().union_with(hx);
            }
        }
        GenericApproximation { universe, h, has_infinity: true }
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn has_infinity(&self) -> bool {
        self.has_infinity
    }

    pub fn domain(&self) -> FinSet {
        self.h.keys().copied().collect()
    }

    pub fn h(&self, x: Ordinal) -> Option<&FinSet> {
        self.h.get(&x)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Ordinal, &FinSet)> {
        self.h.iter().map(|(&x, v)| (x, v))
    }
}

/// Merges a descending chain. Fails with [`Error::NotAChain`] if some
/// member does not extend its predecessor.
pub fn merge_chain(chain: &[Condition]) -> Result<GenericApproximation> {
    for (k, w) in chain.windows(2).enumerate() {
        if !extends(&w[1], &w[0]) {
            return Err(Error::NotAChain { position: k + 1 });
        }
    }
    Ok(GenericApproximation::union_of(chain))
}

/// `h(ξ) \ ⋃_{η ∈ F} h(η)`, for `ξ ∉ F` and all points in the domain.
pub fn basic_nbhd(g: &GenericApproximation, xi: Ordinal, guards: &FinSet) -> Result<FinSet> {
    if guards.contains(xi) {
        return Err(Error::Precondition(format!("{xi} is one of its own guards")));
    }
    let hx = g.h(xi).ok_or_else(|| Error::Precondition(format!("{xi} is not in the domain")))?;
    let mut out = hx.clone();
    for eta in guards.iter() {
        let he = g.h(eta).ok_or_else(|| Error::Precondition(format!("guard {eta} is not in the domain")))?;
        out = out.difference(he);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub levels: BTreeMap<Ordinal, u32>,
    /// Largest level plus one; zero for an empty approximation.
    pub height: u32,
    /// Size of the largest level.
    pub width: usize,
}

/// Level 0 for points with `h(ξ) = {ξ}`, otherwise one more than the
/// largest level in `h(ξ) \ {ξ}`. Points of `h(ξ)` outside the domain are
/// ignored.
pub fn level_structure(g: &GenericApproximation) -> LevelReport {
    let mut levels = BTreeMap::new();
    // Every point of h(ξ) other than ξ is smaller, so ascending order works.
    for (&x, hx) in &g.h {
        let below = hx.iter().filter(|&y| y != x).filter_map(|y| levels.get(&y).copied()).max();
        let level = match below {
            None if hx.iter().all(|y| y == x) => 0,
            None => 1,
            Some(l) => l + 1,
        };
        levels.insert(x, level);
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &l in levels.values() {
        *counts.entry(l).or_default() += 1;
    }
    let height = counts.keys().next_back().map_or(0, |&l| l + 1);
    LevelReport { height, width: counts.values().copied().max().unwrap_or(0), levels }
}

/// Tuples `x^α` with guards `F^α`, one per index `α`, all of the same arity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SeparatedSequence {
    pub points: Vec<Vec<Ordinal>>,
    pub guards: Vec<Vec<FinSet>>,
}

/// Whether the sequence is left-separated in `g`: for all `α < β` some
/// coordinate `i` has `x^α_i ∉ h(x^β_i) \ ⋃ h[F^β_i]`. Each `x^α_i` must lie
/// in its own basic neighborhood.
#[allow(clippy::needless_range_loop)] // α and β index two parallel tables
pub fn is_left_separated(g: &GenericApproximation, seq: &SeparatedSequence) -> Result<bool> {
    if seq.points.len() != seq.guards.len() {
        return Err(Error::Precondition("one guard tuple per point tuple".into()));
    }
    let arity = seq.points.first().map_or(0, Vec::len);
    let mut nbhds = Vec::new();
    for (xs, fs) in seq.points.iter().zip(&seq.guards) {
        if xs.len() != arity || fs.len() != arity {
            return Err(Error::Precondition("tuples of different arity".into()));
        }
        let mut row = Vec::new();
        for (&x, guards) in xs.iter().zip(fs) {
            let u = basic_nbhd(g, x, guards)?;
            if !u.contains(x) {
                return Err(Error::Precondition(format!("{x} is not in its own neighborhood")));
            }
            row.push(u);
        }
        nbhds.push(row);
    }
    for beta in 0..seq.points.len() {
        for alpha in 0..beta {
            let separated = (0..arity).any(|i| !nbhds[beta][i].contains(seq.points[alpha][i]));
            if !separated {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoordinateVerdict {
    pub x_alpha: Ordinal,
    pub x_beta: Ordinal,
    /// `x^α_i ∈ h_q(x^β_i) \ ⋃ h_q[F^β_i]`.
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KillVerdict {
    pub coordinates: Vec<CoordinateVerdict>,
    pub killed: bool,
}

/// Amalgamates `p_α` with its copy `p_β` and reports, coordinate by
/// coordinate, whether `x^α_i` falls into the `β`-th basic neighborhood in
/// the amalgam. `x^β = e[x^α]` and every `x^β_i` must be in its own basic
/// neighborhood `h_β(x^β_i) \ ⋃ h_β[F^β_i]`.
pub fn kill_left_separation(
    p_alpha: &Condition,
    p_beta: &Condition,
    e: &OrderIso,
    x_alpha: &[Ordinal],
    x_beta: &[Ordinal],
    guards_beta: &[FinSet],
    f: &PairTable,
) -> Result<(Condition, KillVerdict)> {
    if find_isomorphism(p_alpha, p_beta).as_ref() != Some(e) {
        return Err(Error::Precondition("e is not an isomorphism between the two conditions".into()));
    }
    if x_alpha.len() != x_beta.len() || x_beta.len() != guards_beta.len() {
        return Err(Error::Precondition("tuples of different arity".into()));
    }
    let before = GenericApproximation::union_of([p_beta]);
    for (&xa, &xb) in x_alpha.iter().zip(x_beta) {
        if e.apply(xa) != Some(xb) {
            return Err(Error::Precondition(format!("e does not map {xa} to {xb}")));
        }
    }
    for (&xb, guards) in x_beta.iter().zip(guards_beta) {
        if !basic_nbhd(&before, xb, guards)?.contains(xb) {
            return Err(Error::Precondition(format!("{xb} is not in its own neighborhood")));
        }
    }
    let q = amalgamate_asymmetric(p_alpha, p_beta, e, f)?;
    let g = GenericApproximation::union_of([&q]);
    let mut coordinates = Vec::new();
    for ((&xa, &xb), guards) in x_alpha.iter().zip(x_beta).zip(guards_beta) {
        let inside = basic_nbhd(&g, xb, guards)?.contains(xa);
        coordinates.push(CoordinateVerdict { x_alpha: xa, x_beta: xb, inside });
    }
    let killed = coordinates.iter().all(|c| c.inside);
    Ok((q, KillVerdict { coordinates, killed }))
}

/// One member of a density ensemble: a condition with a tuple of points in
/// its domain and one guard set per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleItem {
    pub condition: Condition,
    pub tuple: Vec<Ordinal>,
    pub guards: Vec<FinSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniformMap {
    pub from: usize,
    pub to: usize,
    pub e: Vec<(Ordinal, Ordinal)>,
}

/// A uniform sub-ensemble: item indices listed from lowest to highest,
/// the common root of their domains, and the isomorphism between every
/// pair of positions `j < k` (as indices into `items`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Uniformized {
    pub indices: Vec<usize>,
    pub root: FinSet,
    pub maps: Vec<UniformMap>,
}

/// The lower isomorphism from `a` to `b` if it carries tuple onto tuple,
/// guards onto guards, and the two conditions agree on pairs from the
/// common part of their domains.
fn aligned(a: &EnsembleItem, b: &EnsembleItem) -> Option<OrderIso> {
    let e = find_isomorphism(&a.condition, &b.condition)?;
    if !e.is_lower() || a.tuple.len() != b.tuple.len() || a.guards.len() != b.guards.len() {
        return None;
    }
    let tuples = a.tuple.iter().zip(&b.tuple).all(|(&x, &y)| e.apply(x) == Some(y));
    let guards = a.guards.iter().zip(&b.guards).all(|(f, g)| e.apply_set(f).as_ref() == Some(g));
    let overlap = a.condition.domain().intersection(b.condition.domain());
    let witnesses = overlap.pairs().all(|(x, y)| a.condition.i(x, y) == b.condition.i(x, y));
    (tuples && guards && witnesses).then_some(e)
}

/// Finds the largest sub-ensemble whose domains form a Δ-system and whose
/// items are pairwise aligned and linearly ordered by "lower". Among the
/// largest, the lexicographically least index set wins. A nonempty input
/// always yields at least one item.
#[allow(clippy::needless_range_loop)] // j and k index a square matrix
pub fn uniformize_ensemble(items: &[EnsembleItem]) -> Uniformized {
    let n = items.len();
    if n == 0 {
        return Uniformized::default();
    }
    let mut comparable = vec![vec![false; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let ok = aligned(&items[j], &items[k]).is_some() || aligned(&items[k], &items[j]).is_some();
            comparable[j][k] = ok;
            comparable[k][j] = ok;
        }
    }
    let domain = |j: usize| items[j].condition.domain();
    let mut roots: Vec<FinSet> = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let r = domain(j).intersection(domain(k));
            if comparable[j][k] && !roots.contains(&r) {
                roots.push(r);
            }
        }
    }

    let mut best = vec![0];
    let mut best_root = domain(0).clone();
    for root in &roots {
        let adj = |j: usize, k: usize| comparable[j][k] && domain(j).intersection(domain(k)) == *root;
        let mut found = Vec::new();
        grow(&mut Vec::new(), (0..n).collect(), &mut found, &adj);
        if found.len() > best.len() || (found.len() == best.len() && found < best) {
            best = found;
            best_root = root.clone();
        }
    }

    // Pointwise below implies lexicographically below, so sorting by domain
    // lists the items from lowest to highest.
    best.sort_by(|&j, &k| domain(j).as_slice().cmp(domain(k).as_slice()).then(j.cmp(&k)));
    let mut maps = Vec::new();
    for (pos, &j) in best.iter().enumerate() {
        for &k in &best[pos + 1..] {
            let e = aligned(&items[j], &items[k]).expect("clique members are aligned in domain order");
            maps.push(UniformMap { from: j, to: k, e: e.pairs().collect() });
        }
    }
    Uniformized { indices: best, root: best_root, maps }
}

/// Depth-first clique search; cliques are visited in lexicographic order,
/// so the first one of maximum size is kept.
fn grow(current: &mut Vec<usize>, candidates: Vec<usize>, best: &mut Vec<usize>, adj: &dyn Fn(usize, usize) -> bool) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    for (idx, &v) in candidates.iter().enumerate() {
        if current.len() + candidates.len() - idx <= best.len() {
            return;
        }
        let next = candidates[idx + 1..].iter().copied().filter(|&w| adj(v, w)).collect();
        current.push(v);
        grow(current, next, best, adj);
        current.pop();
    }
}
