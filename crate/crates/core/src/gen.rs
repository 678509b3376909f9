//! Seeded random generators for test corpora.
//!
//! Every generator takes an explicit RNG, so a seed reproduces the instance.
//! Generators build their objects to satisfy the invariants they advertise;
//! the test suites still re-check everything.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;

use crate::amalgamation::check_amalgam_hypotheses;
use crate::conditions::{find_isomorphism, Condition, OrderIso};
use crate::delta::{recognize_delta_system, DeltaSystem};
use crate::pair_table::PairTable;
use crate::set::{star, FinSet, Ordinal};
use crate::side::{cap, restrict_p, validate_strong_input, PCondition, RankedFamily, StrongDeltaAmalgamInput};
use crate::space::EnsembleItem;

fn random_subset<R: Rng + ?Sized>(rng: &mut R, pool: &FinSet, p: f64) -> FinSet {
    pool.iter().filter(|_| rng.random_bool(p)).collect()
}

fn sample_set<R: Rng + ?Sized>(rng: &mut R, universe: u32, size: usize) -> FinSet {
    index::sample(rng, universe as usize, size).into_iter().map(|x| x as Ordinal).collect()
}

/// Domains of `copies` conditions sharing a root: every copy has `private`
/// points outside the root, and the order bijection from copy `j` to copy
/// `k > j` fixes the root and moves every point up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub root: FinSet,
    pub domains: Vec<FinSet>,
}

pub fn random_layout<R: Rng + ?Sized>(
    rng: &mut R,
    universe: u32,
    root_size: usize,
    private: usize,
    copies: usize,
) -> Option<Layout> {
    let total = root_size + copies * private;
    if total > universe as usize || copies == 0 {
        return None;
    }
    let positions = sample_set(rng, universe, total);
    // Spread the private points of each copy over the gaps around the root.
    let mut per_gap = vec![0usize; root_size + 1];
    for _ in 0..private {
        per_gap[rng.random_range(0..=root_size)] += 1;
    }
    let mut labels: Vec<Option<usize>> = Vec::with_capacity(total);
    for (gap, &c) in per_gap.iter().enumerate() {
        // Copy j may place its t-th point only after copy j-1 placed its
        // t-th, so the t-th points increase with the copy index.
        let mut placed = vec![0usize; copies];
        for _ in 0..copies * c {
            let allowed: Vec<usize> =
                (0..copies).filter(|&j| placed[j] < c && (j == 0 || placed[j] < placed[j - 1])).collect();
            let &j = allowed.choose(rng).expect("some copy can always move");
            placed[j] += 1;
            labels.push(Some(j));
        }
        if gap < root_size {
            labels.push(None);
        }
    }
    let mut root = FinSet::new();
    let mut domains = vec![FinSet::new(); copies];
    for (x, label) in positions.iter().zip(labels) {
        match label {
            None => {
                root.insert(x);
                for d in &mut domains {
                    d.insert(x);
                }
            }
            Some(j) => {
                domains[j].insert(x);
            }
        }
    }
    Some(Layout { root, domains })
}

/// A random `h` on `domain` with `ξ ∈ h(ξ) ⊆ domain ∩ (ξ + 1)`.
fn random_h<R: Rng + ?Sized>(rng: &mut R, domain: &FinSet, density: f64) -> BTreeMap<Ordinal, FinSet> {
    domain
        .iter()
        .map(|x| {
            let mut hx = random_subset(rng, &domain.below(x), density);
            hx.insert(x);
            (x, hx)
        })
        .collect()
}

/// Witness sets for the `*`-sets of `h`: each point `ζ` of a `*`-set is
/// covered by a random `γ < min{ξ, η}` from `allowed` with `ζ ∈ h(γ)`.
fn cover<R: Rng + ?Sized>(
    rng: &mut R,
    h: &BTreeMap<Ordinal, FinSet>,
    x: Ordinal,
    y: Ordinal,
    allowed: &FinSet,
) -> Option<FinSet> {
    let starred = star(&h[&x], &h[&y]).expect("pairs come in increasing order");
    let mut out = FinSet::new();
    for zeta in starred.iter() {
        if out.iter().any(|g| h[&g].contains(zeta)) {
            continue;
        }
        let options: Vec<Ordinal> = allowed.below(x.min(y)).iter().filter(|&g| h[&g].contains(zeta)).collect();
        out.insert(*options.choose(rng)?);
    }
    Some(out)
}

/// Isomorphic copies of one random condition over a common root, with a
/// pair table under which every pair of copies satisfies the amalgamation
/// hypotheses, and (for `arity > 0`) aligned point tuples with guards.
#[derive(Clone, Debug)]
pub struct CopyFamily {
    pub universe: u32,
    pub root: FinSet,
    pub conditions: Vec<Condition>,
    pub f: PairTable,
    pub tuples: Vec<Vec<Ordinal>>,
    pub guards: Vec<Vec<FinSet>>,
}

impl CopyFamily {
    pub fn items(&self) -> Vec<EnsembleItem> {
        (0..self.conditions.len())
            .map(|j| EnsembleItem {
                condition: self.conditions[j].clone(),
                tuple: self.tuples[j].clone(),
                guards: self.guards[j].clone(),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CopyParams {
    pub universe: u32,
    pub copies: usize,
    pub root_size: usize,
    pub private: usize,
    pub arity: usize,
    /// Chance of adding a spare element to a pair value.
    pub extra: f64,
}

pub fn random_copies<R: Rng + ?Sized>(rng: &mut R, params: CopyParams) -> Option<CopyFamily> {
    let CopyParams { universe, copies, root_size, private, arity, extra } = params;
    let layout = random_layout(rng, universe, root_size, private, copies)?;
    let base = &layout.domains[0];
    let maps: Vec<OrderIso> =
        layout.domains.iter().map(|d| OrderIso::canonical(base, d).expect("equal sizes")).collect();
    let density = rng.random_range(0.2..0.7);

    // Root pairs need witnesses inside the root, common to all copies.
    let mut attempt = 0;
    let (h0, root_i) = loop {
        attempt += 1;
        let mut h = random_h(rng, base, density);
        if attempt > 20 {
            for x in layout.root.iter() {
                let trimmed = h[&x].intersection(&layout.root);
                h.insert(x, trimmed);
            }
        }
        let covers: Option<BTreeMap<_, _>> =
            layout.root.pairs().map(|(x, y)| cover(rng, &h, x, y, &layout.root).map(|c| ((x, y), c))).collect();
        if let Some(c) = covers {
            break (h, c);
        }
    };

    let mut conditions = Vec::new();
    for (j, e) in maps.iter().enumerate() {
        let d = &layout.domains[j];
        let h: BTreeMap<_, _> = h0.iter().map(|(&x, hx)| (e.apply(x).unwrap(), e.apply_set(hx).unwrap())).collect();
        let mut i = BTreeMap::new();
        for (x, y) in d.pairs() {
            let w = match root_i.get(&(x, y)) {
                Some(w) => w.clone(),
                None => cover(rng, &h, x, y, d).expect("ζ covers itself"),
            };
            i.insert((x, y), w);
        }
        conditions.push(Condition::from_parts(universe, d.clone(), h, i));
    }

    let mut f = PairTable::new(universe);
    for p in &conditions {
        for ((x, y), w) in p.i_entries() {
            f.extend(x, y, w).expect("witnesses lie below the pair");
        }
    }
    let all_within: BTreeSet<(Ordinal, Ordinal)> =
        layout.domains.iter().flat_map(|d| d.pairs().collect::<Vec<_>>()).collect();
    for &(x, y) in &all_within {
        if x > 0 && rng.random_bool(extra) {
            f.extend(x, y, &FinSet::singleton(rng.random_range(0..x))).unwrap();
        }
    }
    // Cross pairs between copies j < k: the least value meeting the
    // hypotheses, plus spare elements.
    for j in 0..copies {
        for k in j + 1..copies {
            let (dj, dk) = (&layout.domains[j], &layout.domains[k]);
            for xi in dj.difference(dk).iter() {
                for eta in dk.difference(dj).iter() {
                    let bound = xi.min(eta);
                    let mut need = dj.below(bound);
                    for tau in layout.root.iter() {
                        if tau < xi {
                            need.union_with(f.get(tau, eta));
                        }
                        if tau < eta {
                            need.union_with(f.get(tau, xi));
                        }
                    }
                    if bound > 0 && rng.random_bool(extra) {
                        need.insert(rng.random_range(0..bound));
                    }
                    f.extend(xi, eta, &need).unwrap();
                }
            }
        }
    }

    let mut tuples = vec![Vec::new(); copies];
    let mut guards = vec![Vec::new(); copies];
    let own = base.difference(&layout.root);
    if arity > 0 {
        if own.is_empty() {
            return None;
        }
        let pool: Vec<Ordinal> = own.iter().collect();
        for _ in 0..arity {
            let &x = pool.choose(rng).unwrap();
            let options = base.filter(|g| g != x && !h0[&g].contains(x));
            let size = rng.random_range(0..=options.len().min(2));
            let picked: FinSet = index::sample(rng, options.len(), size).into_iter().map(|k| options.as_slice()[k]).collect();
            for (j, e) in maps.iter().enumerate() {
                tuples[j].push(e.apply(x).unwrap());
                guards[j].push(e.apply_set(&picked).unwrap());
            }
        }
    }
    Some(CopyFamily { universe, root: layout.root, conditions, f, tuples, guards })
}

/// An instance for the asymmetric amalgamation: `p₁` lower than `p₂` via
/// `e`, with a pair table under which the hypotheses hold.
#[derive(Clone, Debug)]
pub struct AmalgamInstance {
    pub p1: Condition,
    pub p2: Condition,
    pub e: OrderIso,
    pub f: PairTable,
}

/// Random copy parameters for `copies` copies over `universe`.
fn copy_params<R: Rng + ?Sized>(rng: &mut R, universe: u32, copies: usize, arity: usize) -> CopyParams {
    let n = universe as usize;
    let min_private = usize::from(arity > 0);
    let private = rng.random_range(min_private..=((n - 1) / copies).max(min_private));
    let room = n.saturating_sub(copies * private);
    let root_size = rng.random_range(0..=room.min(5));
    CopyParams { universe, copies, root_size, private, arity, extra: rng.random_range(0.0..0.4) }
}

/// A hypothesis-satisfying amalgamation instance over `universe ≥ 2`.
pub fn random_amalgam_instance<R: Rng + ?Sized>(rng: &mut R, universe: u32) -> AmalgamInstance {
    loop {
        let params = copy_params(rng, universe, 2, 0);
        if params.root_size + params.private == 0 {
            continue;
        }
        let Some(fam) = random_copies(rng, params) else { continue };
        let (p1, p2) = (fam.conditions[0].clone(), fam.conditions[1].clone());
        let Some(e) = find_isomorphism(&p1, &p2) else { continue };
        let ok = check_amalgam_hypotheses(&p1, &p2, &e, &fam.f).map(|h| h.hold()).unwrap_or(false);
        if ok {
            return AmalgamInstance { p1, p2, e, f: fam.f };
        }
    }
}

/// Removes one element from a random cross-pair value so that (B) is likely
/// to fail. Returns `None` if every cross value is empty.
pub fn perturb_cross_value<R: Rng + ?Sized>(rng: &mut R, inst: &AmalgamInstance) -> Option<PairTable> {
    let (d1, d2) = (inst.p1.domain(), inst.p2.domain());
    let mut candidates = Vec::new();
    for xi in d1.difference(d2).iter() {
        for eta in d2.difference(d1).iter() {
            if !inst.f.get(xi, eta).is_empty() {
                candidates.push((xi, eta));
            }
        }
    }
    let &(xi, eta) = candidates.choose(rng)?;
    let mut value = inst.f.get(xi, eta).clone();
    let &z = value.as_slice().choose(rng)?;
    value.remove(z);
    let mut f = inst.f.clone();
    f.set(xi, eta, value).ok()?;
    Some(f)
}

/// Ranks for `sets` making them a ranked family, if possible: longest-path
/// ranks over the constraints forced by strict inclusion and by trace
/// non-inclusion.
pub fn rank_sets(universe: u32, sets: &[FinSet]) -> Option<RankedFamily> {
    let n = sets.len();
    let mut less = vec![vec![false; n]; n];
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            if sets[j] == sets[k] {
                return None;
            }
            let (x, y) = (&sets[j], &sets[k]);
            // rank y ≤ rank x would force y ∩ α ⊆ x ∩ α.
            let forced = x.is_subset(y) || x.intersection(y).iter().any(|a| !y.below(a).is_subset(&x.below(a)));
            less[j][k] = forced;
        }
    }
    let mut rank = vec![0u32; n];
    // Relaxation n times; one more change means a cycle.
    for round in 0..=n {
        let mut changed = false;
        for j in 0..n {
            for k in 0..n {
                if less[j][k] && rank[k] <= rank[j] {
                    rank[k] = rank[j] + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(RankedFamily::new(universe, sets.to_vec(), rank));
        }
        if round == n {
            return None;
        }
    }
    None
}

/// A random valid ranked family with up to `size` members over `universe`.
pub fn random_ranked_family<R: Rng + ?Sized>(rng: &mut R, universe: u32, size: usize) -> RankedFamily {
    let mut sets: Vec<FinSet> = Vec::new();
    for _ in 0..size * 8 {
        if sets.len() == size {
            break;
        }
        let k = rng.random_range(1..=universe as usize);
        let candidate = sample_set(rng, universe, k);
        sets.push(candidate);
        if rank_sets(universe, &sets).is_none() {
            sets.pop();
        }
    }
    rank_sets(universe, &sets).expect("every accepted prefix is consistent")
}

fn random_p_condition<R: Rng + ?Sized>(
    rng: &mut R,
    family: &RankedFamily,
    a: FinSet,
    members: BTreeSet<usize>,
    fixed: &BTreeMap<(Ordinal, Ordinal), FinSet>,
) -> PCondition {
    let mut f = BTreeMap::new();
    for (x, y) in a.pairs() {
        let value = match fixed.get(&(x, y)) {
            Some(v) => v.clone(),
            None => random_subset(rng, &cap(family, &members, x, y), 0.5),
        };
        f.insert((x, y), value);
    }
    PCondition::new(a, f, members)
}

/// A random instance for the strong-Δ amalgamation, together with its family.
pub fn random_strong_delta_instance<R: Rng + ?Sized>(rng: &mut R) -> (RankedFamily, StrongDeltaAmalgamInput) {
    loop {
        if let Some(found) = try_strong_delta_instance(rng) {
            return found;
        }
    }
}

fn try_strong_delta_instance<R: Rng + ?Sized>(rng: &mut R) -> Option<(RankedFamily, StrongDeltaAmalgamInput)> {
    let n: u32 = rng.random_range(8..=14);
    let all = FinSet::range(n);
    let x0_size = rng.random_range(3..=(n as usize / 2 + 1));
    let x0 = sample_set(rng, n, x0_size);
    let outside = all.difference(&x0);

    let mut sets = vec![x0.clone()];
    for _ in 0..rng.random_range(2..=7) {
        let candidate = match rng.random_range(0..3) {
            // A member that agrees with X0 below a cut and continues outside.
            0 => {
                let cut = rng.random_range(0..n);
                let mut y = x0.below(cut);
                y.union_with(&random_subset(rng, &outside, 0.4));
                y
            }
            // A smaller piece of X0.
            1 => random_subset(rng, &x0, 0.5),
            _ => random_subset(rng, &all, 0.35),
        };
        if candidate.is_empty() || sets.contains(&candidate) {
            continue;
        }
        sets.push(candidate);
        if rank_sets(n, &sets).is_none() {
            sets.pop();
        }
    }
    let family = rank_sets(n, &sets)?;
    let delta = family.ranks()[0];

    let a_q_in: FinSet = random_subset(rng, &x0, 0.35);
    let a_q_out: FinSet = random_subset(rng, &outside, 0.4);
    if a_q_out.is_empty() {
        return None;
    }
    let mut q_members: BTreeSet<usize> = (1..family.len()).filter(|_| rng.random_bool(0.5)).collect();
    q_members.insert(0);
    let q = random_p_condition(rng, &family, a_q_in.union(&a_q_out), q_members, &BTreeMap::new());

    let restricted = restrict_p(&q, &x0, &family);
    let mut z = FinSet::new();
    for &k in q.members() {
        if family.ranks()[k] < delta {
            z.union_with(&family.members()[k].intersection(&x0));
        }
    }
    let fresh = x0.difference(q.a()).difference(&z);
    let new_points = random_subset(rng, &fresh, 0.5);
    if new_points.is_empty() {
        return None;
    }
    let mut s_members = restricted.members().clone();
    for k in 1..family.len() {
        let m = &family.members()[k];
        if m != &x0 && m.is_subset(&x0) && rng.random_bool(0.5) {
            let fits = restricted.f_entries().all(|((x, y), v)| !(m.contains(x) && m.contains(y)) || v.is_subset(m));
            if fits {
                s_members.insert(k);
            }
        }
    }
    let fixed: BTreeMap<_, _> = restricted.f_entries().map(|(k, v)| (k, v.clone())).collect();
    let mut s = random_p_condition(rng, &family, restricted.a().union(&new_points), s_members.clone(), &fixed);
    // New values must also stay inside X0.
    let f_s: BTreeMap<_, _> = s.f_entries().map(|(k, v)| (k, v.intersection(&x0))).collect();
    s = PCondition::new(s.a().clone(), f_s, s_members);

    let old_root_pool = q.a().intersection(&x0);
    let b_pool = q.a().difference(&x0);
    for _ in 0..20 {
        let t = rng.random_range(1..=b_pool.len().min(new_points.len()));
        let pick = |rng: &mut R, set: &FinSet, k: usize| -> FinSet {
            index::sample(rng, set.len(), k).into_iter().map(|i| set.as_slice()[i]).collect()
        };
        let rho = random_subset(rng, &old_root_pool, 0.5);
        let a = rho.union(&pick(rng, &new_points, t));
        let b = rho.union(&pick(rng, &b_pool, t));
        let input = StrongDeltaAmalgamInput { q: q.clone(), s: s.clone(), a, b, x0: 0, delta, z: z.clone() };
        if validate_strong_input(&input, &family).is_empty() {
            return Some((family, input));
        }
    }
    None
}

/// An ensemble of `count` Δ-systems with `size` members each over `n`,
/// laid out at random (so some systems admit no lower pair at all).
pub fn random_delta_ensemble<R: Rng + ?Sized>(rng: &mut R, n: u32, count: usize, size: usize) -> Vec<DeltaSystem> {
    let mut out = Vec::new();
    while out.len() < count {
        let private = rng.random_range(1..=(n as usize / size).max(1));
        if private * size > n as usize {
            continue;
        }
        let root_size = rng.random_range(0..=(n as usize - private * size).min(3));
        let mut points: Vec<Ordinal> = sample_set(rng, n, root_size + private * size).into_vec();
        points.shuffle(rng);
        let root: FinSet = points[..root_size].iter().copied().collect();
        let members: Vec<FinSet> = points[root_size..]
            .chunks(private)
            .map(|chunk| root.union(&chunk.iter().copied().collect()))
            .collect();
        if let Some(sys) = recognize_delta_system(&members) {
            out.push(sys);
        }
    }
    out
}

/// A density ensemble: several aligned copies mixed with unrelated noise
/// items, in shuffled order.
#[derive(Clone, Debug)]
pub struct DensityEnsemble {
    pub items: Vec<EnsembleItem>,
    pub f: PairTable,
}

pub fn random_density_ensemble<R: Rng + ?Sized>(rng: &mut R) -> DensityEnsemble {
    loop {
        let universe = rng.random_range(10..=20);
        let copies = rng.random_range(3..=5);
        let arity = rng.random_range(1..=3);
        let params = copy_params(rng, universe, copies, arity);
        let Some(fam) = random_copies(rng, params) else { continue };
        let mut items = fam.items();
        for _ in 0..rng.random_range(0..=2) {
            let noise = copy_params(rng, universe, 2, arity);
            if let Some(other) = random_copies(rng, noise) {
                items.push(other.items().swap_remove(0));
            }
        }
        items.shuffle(rng);
        return DensityEnsemble { items, f: fam.f };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::validate_condition;
    use crate::side::validate_ranked_family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layouts_are_lower_and_root_fixing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let layout = random_layout(&mut rng, 14, 2, 3, 4).unwrap();
            for j in 0..4 {
                for k in j + 1..4 {
                    let e = OrderIso::canonical(&layout.domains[j], &layout.domains[k]).unwrap();
                    assert!(e.is_lower() && e.is_identity_on_overlap());
                    assert_eq!(layout.domains[j].intersection(&layout.domains[k]), layout.root);
                }
            }
        }
    }

    #[test]
    fn copies_are_valid_and_isomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let params = copy_params(&mut rng, 12, 3, 2);
            let Some(fam) = random_copies(&mut rng, params) else { continue };
            for p in &fam.conditions {
                assert!(validate_condition(p, &fam.f).is_valid());
            }
            assert!(find_isomorphism(&fam.conditions[0], &fam.conditions[2]).is_some());
        }
    }

    #[test]
    fn amalgam_instances_satisfy_the_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for universe in 4..=12 {
            let inst = random_amalgam_instance(&mut rng, universe);
            assert!(check_amalgam_hypotheses(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap().hold());
        }
    }

    #[test]
    fn families_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            assert!(validate_ranked_family(&random_ranked_family(&mut rng, 10, 6)).is_valid());
        }
    }

    #[test]
    fn strong_instances_pass_their_own_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (family, input) = random_strong_delta_instance(&mut rng);
            assert!(validate_ranked_family(&family).is_valid());
            assert!(validate_strong_input(&input, &family).is_empty());
        }
    }
}
