use std::collections::BTreeMap;

use hsforce::amalgamation::{amalgamate_asymmetric, case_coverage, check_amalgam_hypotheses, check_star_projection, CaseCoverage};
use hsforce::delta::{check_bs_witness, check_strong_witness, family_has_witness, search_pair_table, SearchOutcome, WitnessMode};
use hsforce::gen::{perturb_cross_value, random_amalgam_instance, random_delta_ensemble, random_strong_delta_instance};
use hsforce::oracle::{brute_force_common_extension, oracle_accepts};
use hsforce::side::{amalgamate_p_strong_delta, extract_pair_table, p_extends, restrict_p, validate_p_condition};
use hsforce::space::{basic_nbhd, level_structure, merge_chain, GenericApproximation};
use hsforce::{check_projection, delta2, extends, find_isomorphism, validate_condition, Error, FinSet, OrderIso, PairTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn amalgams_are_sound(seed in any::<u64>(), universe in 4u32..=12) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let q = amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap();
        prop_assert!(validate_condition(&q, &inst.f).is_valid());
        prop_assert!(extends(&q, &inst.p1) && extends(&q, &inst.p2));
        for x in inst.p1.domain().iter() {
            for y in inst.p2.domain().iter() {
                let ex = inst.e.apply(x).unwrap();
                prop_assert_eq!(q.h(y).contains(x), inst.p2.h(y).contains(ex));
            }
        }
    }

    #[test]
    fn isomorphism_is_symmetric(seed in any::<u64>(), universe in 4u32..=12) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let back = find_isomorphism(&inst.p2, &inst.p1).unwrap();
        prop_assert_eq!(back, inst.e.inverse());
        prop_assert!(find_isomorphism(&inst.p1, &inst.p1).unwrap().is_lower());
    }

    #[test]
    fn delta2_laws_and_projection(seed in any::<u64>(), universe in 4u32..=12) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let d2 = delta2(&inst.p1, &inst.p2);
        for (eta, value) in d2.iter() {
            if inst.p1.domain().contains(eta) {
                prop_assert_eq!(value, eta);
            } else {
                prop_assert!(eta < value);
            }
        }
        prop_assert!(check_projection(&inst.p1, &inst.p2, &inst.e).unwrap());
    }

    #[test]
    fn star_projection_regression(seed in any::<u64>(), universe in 4u32..=12) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let q = amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap();
        let q_h: BTreeMap<_, _> = q.h_entries().map(|(x, v)| (x, v.clone())).collect();
        let d2 = delta2(&inst.p1, &inst.p2);
        prop_assert!(check_star_projection(&inst.p1, q.domain(), &q_h, d2.as_map()).unwrap());
        let g: BTreeMap<_, _> = inst.e.pairs().collect();
        prop_assert!(check_star_projection(&inst.p2, q.domain(), &q_h, &g).unwrap());
    }

    #[test]
    fn perturbed_tables_are_rejected_with_the_report(seed in any::<u64>(), universe in 4u32..=12) {
        let mut r = rng(seed);
        let inst = random_amalgam_instance(&mut r, universe);
        if let Some(f) = perturb_cross_value(&mut r, &inst) {
            let report = check_amalgam_hypotheses(&inst.p1, &inst.p2, &inst.e, &f).unwrap();
            match amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &f) {
                Err(Error::Hypotheses(h)) => prop_assert_eq!(*h, report),
                Err(Error::Precondition(_)) => {} // the smaller f may no longer cover i
                Ok(q) => {
                    prop_assert!(report.hold());
                    prop_assert!(validate_condition(&q, &f).is_valid());
                }
                Err(other) => prop_assert!(false, "unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn small_amalgams_agree_with_the_oracle(seed in any::<u64>(), universe in 4u32..=7) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let q = amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap();
        prop_assert!(oracle_accepts(&q, &inst.p1, &inst.p2, &inst.f));
        let found = brute_force_common_extension(&inst.p1, &inst.p2, &inst.f, 7).unwrap();
        let found = found.expect("the oracle finds an extension");
        prop_assert!(validate_condition(&found, &inst.f).is_valid());
        prop_assert!(extends(&found, &inst.p1) && extends(&found, &inst.p2));
    }

    #[test]
    fn extension_keeps_old_data(seed in any::<u64>(), universe in 4u32..=12) {
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let q = amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap();
        let g = merge_chain(&[inst.p1.clone(), q.clone()]).unwrap();
        for x in inst.p1.domain().iter() {
            prop_assert_eq!(&g.h(x).unwrap().intersection(inst.p1.domain()), inst.p1.h(x));
        }
        // Levels never drop along the chain, and neither does height.
        let before = level_structure(&merge_chain(std::slice::from_ref(&inst.p1)).unwrap());
        let after = level_structure(&g);
        for (x, l) in &before.levels {
            prop_assert!(after.levels[x] >= *l);
        }
        prop_assert!(after.height >= before.height);
    }

    #[test]
    fn basic_neighborhoods_are_contained(seed in any::<u64>(), universe in 4u32..=12) {
        let mut r = rng(seed);
        let inst = random_amalgam_instance(&mut r, universe);
        let g = GenericApproximation::union_of([&inst.p1]);
        let d = inst.p1.domain();
        for x in d.iter() {
            let guards: FinSet = d.iter().filter(|&y| y != x && r.random_bool(0.3)).collect();
            let u = basic_nbhd(&g, x, &guards).unwrap();
            prop_assert!(u.is_subset(inst.p1.h(x)));
            let covered = guards.iter().any(|y| inst.p1.h(y).contains(x));
            prop_assert_eq!(u.contains(x), !covered);
        }
    }

    #[test]
    fn strong_implies_weak_and_is_local(seed in any::<u64>(), universe in 4u32..=12) {
        let mut r = rng(seed);
        let inst = random_amalgam_instance(&mut r, universe);
        let (a, b) = (inst.p1.domain(), inst.p2.domain());
        if a == b {
            return Ok(());
        }
        let e = OrderIso::canonical(a, b).unwrap();
        let strong = check_strong_witness(&inst.f, a, b, &e).unwrap();
        if strong.ok() {
            prop_assert!(check_bs_witness(&inst.f, a, b).ok());
        }
        // Mutating f away from a ∪ b changes nothing.
        let support = a.union(b);
        let mut g = inst.f.clone();
        for x in 1..universe {
            for y in x + 1..universe {
                if !support.contains(x) || !support.contains(y) {
                    g.set(x, y, FinSet::range(x)).unwrap();
                }
            }
        }
        prop_assert_eq!(check_strong_witness(&g, a, b, &e).unwrap(), strong);
    }

    #[test]
    fn witness_pairs_satisfy_the_amalgamation_hypotheses(seed in any::<u64>(), universe in 4u32..=12) {
        // Bridge: a strong witness (a, b) for f plus (A) gives (B).
        let inst = random_amalgam_instance(&mut rng(seed), universe);
        let (a, b) = (inst.p1.domain(), inst.p2.domain());
        let e = OrderIso::canonical(a, b).unwrap();
        if check_strong_witness(&inst.f, a, b, &e).unwrap().ok() {
            prop_assert!(check_amalgam_hypotheses(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap().hold());
        }
    }

    #[test]
    fn strong_side_amalgams_realize_the_property(seed in any::<u64>()) {
        let (family, input) = random_strong_delta_instance(&mut rng(seed));
        let r = amalgamate_p_strong_delta(&input, &family).unwrap();
        prop_assert!(validate_p_condition(&r, &family).is_valid());
        prop_assert!(p_extends(&r, &input.q) && p_extends(&r, &input.s));
        let table = extract_pair_table(&[input.q.clone(), r], family.universe()).unwrap();
        let e = OrderIso::canonical(&input.a, &input.b).unwrap();
        prop_assert!(check_strong_witness(&table, &input.a, &input.b, &e).unwrap().ok());
    }

    #[test]
    fn restriction_is_idempotent_and_below(seed in any::<u64>()) {
        let (family, input) = random_strong_delta_instance(&mut rng(seed));
        for x in family.members() {
            let once = restrict_p(&input.q, x, &family);
            prop_assert_eq!(restrict_p(&once, x, &family), once.clone());
            prop_assert!(p_extends(&input.q, &once));
            prop_assert!(validate_p_condition(&once, &family).is_valid());
        }
    }

    #[test]
    fn searched_tables_reverify(seed in any::<u64>(), n in 6u32..=12) {
        let mut r = rng(seed);
        let ensemble = random_delta_ensemble(&mut r, n, 3, 4);
        match search_pair_table(n, &ensemble, WitnessMode::Strong, 10_000).unwrap() {
            SearchOutcome::Found { table, .. } => {
                for sys in &ensemble {
                    prop_assert!(family_has_witness(&table, sys, WitnessMode::Strong).is_found());
                }
            }
            SearchOutcome::Unsatisfiable { system, .. } => {
                prop_assert!(!family_has_witness(&PairTable::new(n), &ensemble[system], WitnessMode::Strong).is_found());
            }
            SearchOutcome::Exhausted { .. } => {}
        }
    }
}

#[test]
fn the_corpus_hits_every_proof_case() {
    let mut total = CaseCoverage::default();
    let mut r = rng(7);
    for k in 0..2000 {
        let inst = random_amalgam_instance(&mut r, 4 + k % 9);
        let q = amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f).unwrap();
        total.add(&case_coverage(&inst.p1, &inst.p2, &q));
    }
    assert!(total.all_hit(), "{total:?}");
}
