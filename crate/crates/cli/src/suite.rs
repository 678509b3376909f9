//! The randomized acceptance battery run by `hsforce suite`.
//!
//! Each criterion draws its instances from its own ChaCha stream of the
//! seed, so criteria are independent and every report is reproducible.
//! Reports carry counts only, never timings.

use std::collections::BTreeMap;

use hsforce::amalgamation::{amalgamate_asymmetric, case_coverage, CaseCoverage};
use hsforce::delta::{
    brute_force_pair_table, check_strong_witness, family_has_witness, recognize_delta_system, search_pair_table,
    SearchOutcome, WitnessMode, WitnessSearch, BRUTE_FORCE_LIMIT,
};
use hsforce::gen::{random_amalgam_instance, random_delta_ensemble, random_density_ensemble, random_strong_delta_instance};
use hsforce::oracle::{brute_force_common_extension, is_below, is_condition, oracle_accepts};
use hsforce::side::{amalgamate_p_strong_delta, extract_pair_table, p_extends, validate_p_condition};
use hsforce::space::{
    is_left_separated, kill_left_separation, merge_chain, uniformize_ensemble, GenericApproximation, SeparatedSequence,
};
use hsforce::{check_projection, delta2, extends, validate_condition, FinSet, OrderIso, PairTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Instance counts at scale 100.
pub const AMALGAMS: usize = 10_000;
pub const ORACLE_INSTANCES: usize = 1_000;
pub const STRONG_INSTANCES: usize = 1_000;
pub const DENSITY_ENSEMBLES: usize = 500;
pub const SEARCH_ENSEMBLES: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    /// Instances the criterion asks for at this scale.
    pub required: usize,
    pub instances: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub stats: BTreeMap<&'static str, u64>,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str, required: usize) -> Self {
        CriterionReport { id, name, required, ..Default::default() }
    }

    fn fail(&mut self, message: impl FnOnce() -> String) {
        if self.first_failure.is_none() {
            self.first_failure = Some(message());
        }
        self.failures += 1;
    }

    fn bump(&mut self, stat: &'static str) {
        *self.stats.entry(stat).or_default() += 1;
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances >= self.required
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub scale: u32,
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

fn stream(seed: u64, id: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(id));
    rng
}

fn scaled(count: usize, scale: u32) -> usize {
    (count * scale as usize).div_ceil(100).max(1)
}

/// Runs criteria 1–6 at `scale` percent of the full instance counts.
pub fn run_suite(seed: u64, scale: u32, budget: u64) -> SuiteReport {
    let (soundness, projection) = amalgam_soundness(seed, scaled(AMALGAMS, scale));
    let criteria = vec![
        soundness,
        oracle_agreement(seed, scaled(ORACLE_INSTANCES, scale)),
        projection,
        strong_delta_chain(seed, scaled(STRONG_INSTANCES, scale)),
        density_end_to_end(seed, scaled(DENSITY_ENSEMBLES, scale)),
        search_soundness(seed, scaled(SEARCH_ENSEMBLES, scale), budget),
    ];
    let passed = criteria.iter().all(CriterionReport::passed);
    SuiteReport { seed, scale, criteria, passed }
}

/// Criteria 1 and 3, over the same instances.
pub fn amalgam_soundness(seed: u64, count: usize) -> (CriterionReport, CriterionReport) {
    let mut sound = CriterionReport::new(1, "amalgamation soundness", count);
    let mut laws = CriterionReport::new(3, "projection and delta2 laws", count);
    let mut rng = stream(seed, 1);
    let mut coverage = CaseCoverage::default();
    for k in 0..count {
        let universe = 4 + (k % 9) as u32;
        let inst = random_amalgam_instance(&mut rng, universe);
        sound.instances += 1;
        laws.instances += 1;

        match amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f) {
            Err(e) => sound.fail(|| format!("instance {k}: {e}")),
            Ok(q) => {
                if !validate_condition(&q, &inst.f).is_valid() {
                    sound.fail(|| format!("instance {k}: amalgam is not a condition"));
                } else if !(extends(&q, &inst.p1) && extends(&q, &inst.p2)) {
                    sound.fail(|| format!("instance {k}: amalgam does not extend both inputs"));
                } else if let Some((x, y)) = transfer_failure(&q, &inst.p1, &inst.p2, &inst.e) {
                    sound.fail(|| format!("instance {k}: transfer fails at ξ={x}, η={y}"));
                }
                coverage.add(&case_coverage(&inst.p1, &inst.p2, &q));
            }
        }

        let d2 = delta2(&inst.p1, &inst.p2);
        let overlap = inst.p1.domain().intersection(inst.p2.domain());
        let fixed = d2.iter().all(|(eta, v)| if overlap.contains(eta) { v == eta } else { eta < v });
        if !fixed {
            laws.fail(|| format!("instance {k}: δ₂ breaks a law"));
        }
        match check_projection(&inst.p1, &inst.p2, &inst.e) {
            Ok(true) => {}
            Ok(false) => laws.fail(|| format!("instance {k}: projection law fails")),
            Err(e) => laws.fail(|| format!("instance {k}: {e}")),
        }
    }
    let hits = [
        ("case_overlap", coverage.overlap),
        ("case_both_in_first", coverage.both_in_first),
        ("case_both_in_second", coverage.both_in_second),
        ("case_split_first_second", coverage.split_first_second),
        ("case_split_second_first", coverage.split_second_first),
        ("case_theta_below", coverage.theta_below),
        ("case_theta_above", coverage.theta_above),
    ];
    for (name, n) in hits {
        sound.stats.insert(name, n as u64);
    }
    if !coverage.all_hit() {
        sound.fail(|| "some proof case was never exercised".into());
    }
    (sound, laws)
}

fn transfer_failure(
    q: &hsforce::Condition,
    p1: &hsforce::Condition,
    p2: &hsforce::Condition,
    e: &OrderIso,
) -> Option<(u32, u32)> {
    for x in p1.domain().iter() {
        let ex = e.apply(x)?;
        for y in p2.domain().iter() {
            if q.h(y).contains(x) != p2.h(y).contains(ex) {
                return Some((x, y));
            }
        }
    }
    None
}

/// Criterion 2.
pub fn oracle_agreement(seed: u64, count: usize) -> CriterionReport {
    let mut report = CriterionReport::new(2, "oracle agreement", count);
    let mut rng = stream(seed, 2);
    for k in 0..count {
        let universe = 3 + (k % 5) as u32;
        let inst = random_amalgam_instance(&mut rng, universe);
        report.instances += 1;
        let q = match amalgamate_asymmetric(&inst.p1, &inst.p2, &inst.e, &inst.f) {
            Ok(q) => q,
            Err(e) => {
                report.fail(|| format!("instance {k}: {e}"));
                continue;
            }
        };
        if !oracle_accepts(&q, &inst.p1, &inst.p2, &inst.f) {
            report.fail(|| format!("instance {k}: the oracle rejects the amalgam"));
        }
        match brute_force_common_extension(&inst.p1, &inst.p2, &inst.f, 7) {
            Ok(Some(found)) => {
                let certified =
                    is_condition(&found, &inst.f) && is_below(&found, &inst.p1) && is_below(&found, &inst.p2);
                if !certified {
                    report.fail(|| format!("instance {k}: the oracle's extension does not certify"));
                }
                if found == q {
                    report.bump("oracle_found_the_amalgam");
                }
            }
            Ok(None) => report.fail(|| format!("instance {k}: no extension found")),
            Err(e) => report.fail(|| format!("instance {k}: {e}")),
        }
    }
    report
}

/// Criterion 4.
pub fn strong_delta_chain(seed: u64, count: usize) -> CriterionReport {
    let mut report = CriterionReport::new(4, "strong delta realization", count);
    let mut rng = stream(seed, 4);
    for k in 0..count {
        let (family, input) = random_strong_delta_instance(&mut rng);
        report.instances += 1;
        if input.a != input.b {
            report.bump("with_cross_pairs");
        }
        let r = match amalgamate_p_strong_delta(&input, &family) {
            Ok(r) => r,
            Err(e) => {
                report.fail(|| format!("instance {k}: {e}"));
                continue;
            }
        };
        if !validate_p_condition(&r, &family).is_valid() {
            report.fail(|| format!("instance {k}: r is not a condition"));
            continue;
        }
        if !(p_extends(&r, &input.q) && p_extends(&r, &input.s)) {
            report.fail(|| format!("instance {k}: r does not extend both inputs"));
            continue;
        }
        let witness = extract_pair_table(&[input.q.clone(), r], family.universe()).and_then(|table| {
            let e = OrderIso::canonical(&input.a, &input.b).expect("a and b have equal sizes");
            check_strong_witness(&table, &input.a, &input.b, &e)
        });
        match witness {
            Ok(w) if w.ok() => {}
            Ok(w) => report.fail(|| format!("instance {k}: clauses fail: {:?}", w.failed_clauses)),
            Err(e) => report.fail(|| format!("instance {k}: {e}")),
        }
    }
    report
}

/// Criterion 5. Ensembles whose uniform part is a single item, or whose
/// table has no witness pair, do not count towards `count`.
pub fn density_end_to_end(seed: u64, count: usize) -> CriterionReport {
    let mut report = CriterionReport::new(5, "density argument end to end", count);
    let mut rng = stream(seed, 5);
    let max_attempts = 50 * count;
    for attempt in 0..max_attempts {
        if report.instances == count {
            break;
        }
        let ens = random_density_ensemble(&mut rng);
        report.bump("generated");
        let uniform = uniformize_ensemble(&ens.items);
        if uniform.indices.len() < 2 {
            report.bump("skipped_single_item");
            continue;
        }
        let domains: Vec<FinSet> =
            uniform.indices.iter().map(|&j| ens.items[j].condition.domain().clone()).collect();
        let Some(system) = recognize_delta_system(&domains) else {
            report.fail(|| format!("attempt {attempt}: uniformized domains are not a Δ-system"));
            continue;
        };
        let witness = match family_has_witness(&ens.f, &system, WitnessMode::Strong) {
            WitnessSearch::Found(w) => w,
            WitnessSearch::Absent { .. } => {
                report.bump("skipped_no_witness");
                continue;
            }
        };
        report.instances += 1;
        let (j, k) = witness.pair.expect("found witnesses name their pair");
        let (alpha, beta) = (&ens.items[uniform.indices[j]], &ens.items[uniform.indices[k]]);
        if let Err(message) = kill_and_compare(alpha, beta, &ens.f) {
            report.fail(|| format!("attempt {attempt}: {message}"));
        }
    }
    report
}

fn kill_and_compare(
    alpha: &hsforce::space::EnsembleItem,
    beta: &hsforce::space::EnsembleItem,
    f: &PairTable,
) -> Result<(), String> {
    let (pa, pb) = (&alpha.condition, &beta.condition);
    let e = OrderIso::canonical(pa.domain(), pb.domain()).ok_or("domains of different sizes")?;
    let (q, verdict) = kill_left_separation(pa, pb, &e, &alpha.tuple, &beta.tuple, &beta.guards, f)
        .map_err(|e| format!("kill failed: {e}"))?;
    if !verdict.killed {
        return Err(format!("kill verdict negative: {:?}", verdict.coordinates));
    }
    let seq = SeparatedSequence {
        points: vec![alpha.tuple.clone(), beta.tuple.clone()],
        guards: vec![alpha.guards.clone(), beta.guards.clone()],
    };
    let before = GenericApproximation::union_of([pa, pb]);
    if !is_left_separated(&before, &seq).map_err(|e| format!("before: {e}"))? {
        return Err("the pair is not left-separated before amalgamation".into());
    }
    let after = merge_chain(&[pa.clone(), q]).map_err(|e| format!("merge: {e}"))?;
    if is_left_separated(&after, &seq).map_err(|e| format!("after: {e}"))? {
        return Err("the pair is still left-separated after amalgamation".into());
    }
    Ok(())
}

/// The nested system `{0,5}, {1,4}, {2,3}` has no lower pair at all, so
/// the search must call it unsatisfiable and the brute force must agree.
fn nested_control() -> Vec<hsforce::delta::DeltaSystem> {
    let members = [FinSet::from([0, 5]), FinSet::from([1, 4]), FinSet::from([2, 3])];
    vec![recognize_delta_system(&members).expect("disjoint pairs form a Δ-system")]
}

/// Criterion 6.
pub fn search_soundness(seed: u64, count: usize, budget: u64) -> CriterionReport {
    let mut report = CriterionReport::new(6, "search soundness", count);
    let mut rng = stream(seed, 6);
    let mut cases: Vec<(u32, Vec<hsforce::delta::DeltaSystem>)> = Vec::new();
    for k in 0..count {
        let n = 6 + (k % 7) as u32;
        let systems = 1 + k % 3;
        cases.push((n, random_delta_ensemble(&mut rng, n, systems, 5)));
    }
    cases.push((6, nested_control()));
    for (k, (n, ensemble)) in cases.iter().enumerate() {
        let control = k == count;
        if !control {
            report.instances += 1;
        }
        match search_pair_table(*n, ensemble, WitnessMode::Strong, budget) {
            Ok(SearchOutcome::Found { table, .. }) => {
                report.bump("found");
                if control {
                    report.fail(|| "the nested control was reported satisfiable".into());
                }
                if !ensemble.iter().all(|s| family_has_witness(&table, s, WitnessMode::Strong).is_found()) {
                    report.fail(|| format!("ensemble {k}: returned table misses a witness"));
                }
            }
            Ok(SearchOutcome::Exhausted { .. }) => report.bump("exhausted"),
            Ok(SearchOutcome::Unsatisfiable { system, .. }) => {
                report.bump("unsatisfiable");
                if family_has_witness(&PairTable::new(*n), &ensemble[system], WitnessMode::Strong) != (WitnessSearch::Absent { best: None }) {
                    report.fail(|| format!("ensemble {k}: system {system} has admissible pairs"));
                }
                if *n <= BRUTE_FORCE_LIMIT {
                    report.bump("brute_force_checked");
                    match brute_force_pair_table(*n, ensemble, WitnessMode::Strong, 1 << 21) {
                        Ok(SearchOutcome::Found { .. }) => {
                            report.fail(|| format!("ensemble {k}: false unsatisfiable verdict"))
                        }
                        Ok(SearchOutcome::Exhausted { .. }) => report.bump("brute_force_exhausted"),
                        Ok(SearchOutcome::Unsatisfiable { .. }) => {}
                        Err(e) => report.fail(|| format!("ensemble {k}: {e}")),
                    }
                }
            }
            Err(e) => report.fail(|| format!("ensemble {k}: {e}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_rounds_up() {
        assert_eq!(scaled(10_000, 100), 10_000);
        assert_eq!(scaled(100, 1), 1);
        assert_eq!(scaled(500, 3), 15);
    }

    #[test]
    fn small_suite_passes_and_repeats() {
        let a = run_suite(11, 1, 10_000);
        assert!(a.passed, "{a:#?}");
        assert_eq!(a.criteria.iter().map(|c| c.id).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(run_suite(11, 1, 10_000), a);
    }
}
