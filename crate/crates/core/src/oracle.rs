//! Exhaustive search for a common extension of two conditions.
//!
//! This module deliberately does not reuse the validator or the `*`
//! operation from the rest of the crate: it re-derives membership and order
//! from the raw clauses on `BTreeSet`s, so it can serve as an independent
//! check on [`amalgamate_asymmetric`](crate::amalgamation::amalgamate_asymmetric).

use std::collections::{BTreeMap, BTreeSet};

use crate::conditions::Condition;
use crate::error::{Error, Result};
use crate::pair_table::PairTable;
use crate::set::{FinSet, Ordinal};

type Set = BTreeSet<Ordinal>;

fn raw(s: &FinSet) -> Set {
    s.iter().collect()
}

/// Membership of `q` in the poset, straight from the defining clauses.
pub fn is_condition(q: &Condition, f: &PairTable) -> bool {
    let d = raw(q.domain());
    if d.iter().any(|&x| x >= q.universe()) {
        return false;
    }
    let h: BTreeMap<Ordinal, Set> = d.iter().map(|&x| (x, raw(q.h(x)))).collect();
    for (&x, hx) in &h {
        if hx.iter().next_back() != Some(&x) || !hx.is_subset(&d) {
            return false;
        }
    }
    if q.h_entries().any(|(x, _)| !d.contains(&x)) {
        return false;
    }
    for ((x, y), v) in q.i_entries() {
        if !d.contains(&x) || !d.contains(&y) {
            return false;
        }
        let v = raw(v);
        if !v.is_subset(&d) || !v.is_subset(&raw(f.get(x, y))) {
            return false;
        }
    }
    let ds: Vec<Ordinal> = d.iter().copied().collect();
    for (a, &x) in ds.iter().enumerate() {
        for &y in &ds[a + 1..] {
            let i: Set = raw(q.i(x, y));
            if !pair_covered(&h, x, y, &i) {
                return false;
            }
        }
    }
    true
}

/// Clause (3) for the pair `x < y` with witness set `i`.
fn pair_covered(h: &BTreeMap<Ordinal, Set>, x: Ordinal, y: Ordinal, i: &Set) -> bool {
    let (hx, hy) = (&h[&x], &h[&y]);
    let cover: Set = i.iter().flat_map(|g| h[g].iter().copied()).collect();
    if hy.contains(&x) {
        hx.difference(hy).all(|z| cover.contains(z))
    } else {
        hx.intersection(hy).all(|z| cover.contains(z))
    }
}

/// `q ≤ p`, straight from the definition of the order.
pub fn is_below(q: &Condition, p: &Condition) -> bool {
    let (dq, dp) = (raw(q.domain()), raw(p.domain()));
    if !dp.is_subset(&dq) {
        return false;
    }
    for &x in &dp {
        let restricted: Set = raw(q.h(x)).intersection(&dp).copied().collect();
        if restricted != raw(p.h(x)) {
            return false;
        }
    }
    let ds: Vec<Ordinal> = dp.iter().copied().collect();
    for (a, &x) in ds.iter().enumerate() {
        for &y in &ds[a + 1..] {
            if raw(q.i(x, y)) != raw(p.i(x, y)) {
                return false;
            }
        }
    }
    true
}

/// Certifies a proposed common extension: `D_q = D₁ ∪ D₂`, `q` is a
/// condition for `f`, and `q` extends both inputs.
pub fn oracle_accepts(q: &Condition, p1: &Condition, p2: &Condition, f: &PairTable) -> bool {
    let union: Set = raw(p1.domain()).union(&raw(p2.domain())).copied().collect();
    raw(q.domain()) == union && is_condition(q, f) && is_below(q, p1) && is_below(q, p2)
}

fn subset_of(bits: &[Ordinal], mask: u64) -> impl Iterator<Item = Ordinal> + '_ {
    bits.iter().enumerate().filter(move |(k, _)| mask >> k & 1 == 1).map(|(_, &x)| x)
}

/// Searches for a common extension `q` of `p₁` and `p₂` with domain exactly
/// `D₁ ∪ D₂`.
///
/// Assignments of `h_q` are enumerated lexicographically (by point, then by
/// the bitmask of free elements); for each one, every cross pair takes the
/// smallest admissible witness set `i_q ⊆ f ∩ D_q`. The first certified `q`
/// is returned, so the result is deterministic. Universes larger than
/// `bound` are refused with [`Error::BoundExceeded`].
pub fn brute_force_common_extension(
    p1: &Condition,
    p2: &Condition,
    f: &PairTable,
    bound: u32,
) -> Result<Option<Condition>> {
    let universe = p1.universe().max(p2.universe());
    if universe > bound {
        return Err(Error::BoundExceeded { universe, bound });
    }
    let (d1, d2) = (raw(p1.domain()), raw(p2.domain()));
    let dq: Vec<Ordinal> = d1.union(&d2).copied().collect();

    // Pairs inside D₁ or D₂ have their witness sets fixed by the inputs.
    let mut fixed_i: BTreeMap<(Ordinal, Ordinal), Set> = BTreeMap::new();
    let mut cross = Vec::new();
    for (a, &x) in dq.iter().enumerate() {
        for &y in &dq[a + 1..] {
            let in1 = d1.contains(&x) && d1.contains(&y);
            let in2 = d2.contains(&x) && d2.contains(&y);
            match (in1, in2) {
                (true, true) => {
                    if raw(p1.i(x, y)) != raw(p2.i(x, y)) {
                        return Ok(None);
                    }
                    fixed_i.insert((x, y), raw(p1.i(x, y)));
                }
                (true, false) => drop(fixed_i.insert((x, y), raw(p1.i(x, y)))),
                (false, true) => drop(fixed_i.insert((x, y), raw(p2.i(x, y)))),
                (false, false) => cross.push((x, y)),
            }
        }
    }

    // For each point: the part of h_q forced by the inputs and the elements
    // whose membership is free.
    let mut forced = Vec::new();
    let mut free = Vec::new();
    for &x in &dq {
        let mut base = Set::from([x]);
        let mut open = Vec::new();
        if d1.contains(&x) {
            base.extend(raw(p1.h(x)));
        }
        if d2.contains(&x) {
            base.extend(raw(p2.h(x)));
        }
        if d1.contains(&x) && d2.contains(&x) {
            let a: Set = raw(p1.h(x)).intersection(&d2).copied().collect();
            let b: Set = raw(p2.h(x)).intersection(&d1).copied().collect();
            if a != b {
                return Ok(None);
            }
        }
        for &y in dq.iter().filter(|&&y| y < x) {
            let pinned = (d1.contains(&x) && d1.contains(&y)) || (d2.contains(&x) && d2.contains(&y));
            if !pinned {
                open.push(y);
            }
        }
        forced.push(base);
        free.push(open);
    }
    let free_bits: usize = free.iter().map(Vec::len).sum();
    if free_bits >= 64 {
        return Err(Error::BoundExceeded { universe, bound });
    }

    let witness_pool: BTreeMap<(Ordinal, Ordinal), Vec<Ordinal>> = cross
        .iter()
        .map(|&(x, y)| ((x, y), f.get(x, y).iter().filter(|z| dq.contains(z)).collect()))
        .collect();

    let mut masks = vec![0u64; dq.len()];
    loop {
        let h: BTreeMap<Ordinal, Set> = dq
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let mut s = forced[k].clone();
                s.extend(subset_of(&free[k], masks[k]));
                (x, s)
            })
            .collect();

        let fixed_ok = fixed_i.iter().all(|(&(x, y), i)| pair_covered(&h, x, y, i));
        if fixed_ok {
            let mut chosen = BTreeMap::new();
            let mut all = true;
            for &(x, y) in &cross {
                let pool = &witness_pool[&(x, y)];
                let found = (0..1u64 << pool.len())
                    .map(|m| subset_of(pool, m).collect::<Set>())
                    .find(|i| pair_covered(&h, x, y, i));
                match found {
                    Some(i) => drop(chosen.insert((x, y), i)),
                    None => {
                        all = false;
                        break;
                    }
                }
            }
            if all {
                let q = assemble(universe, &dq, &h, &fixed_i, &chosen);
                if oracle_accepts(&q, p1, p2, f) {
                    return Ok(Some(q));
                }
            }
        }

        // Odometer step: the last point varies fastest.
        let mut k = dq.len();
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            if masks[k] + 1 < 1u64 << free[k].len() {
                masks[k] += 1;
                break;
            }
            masks[k] = 0;
        }
    }
}

fn assemble(
    universe: u32,
    dq: &[Ordinal],
    h: &BTreeMap<Ordinal, Set>,
    fixed_i: &BTreeMap<(Ordinal, Ordinal), Set>,
    chosen: &BTreeMap<(Ordinal, Ordinal), Set>,
) -> Condition {
    let domain: FinSet = dq.iter().copied().collect();
    let h = h.iter().map(|(&x, s)| (x, s.iter().copied().collect())).collect();
    let i = fixed_i
        .iter()
        .chain(chosen)
        .map(|(&k, s)| (k, s.iter().copied().collect()))
        .collect();
    Condition::from_parts(universe, domain, h, i)
}
