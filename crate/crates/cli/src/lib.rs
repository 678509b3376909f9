//! Batch front end for `hsforce`: JSON schemas, the verbs of the `hsforce`
//! binary, and the randomized acceptance battery behind `hsforce suite`.
//!
//! Every run produces one report document
//!
//! ```text
//! {config, exit, result, status, tool, verb, version}
//! ```
//!
//! and an exit status: 0 when the property holds or the construction
//! succeeded, 1 when the property fails (the witness is in `result`), 2 on
//! a parse error or a violated precondition.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hsforce::amalgamation::amalgamate_asymmetric;
use hsforce::delta::{family_has_witness, recognize_delta_system, search_pair_table, SearchOutcome, WitnessMode};
use hsforce::oracle::{brute_force_common_extension, oracle_accepts};
use hsforce::side::{
    amalgamate_p_isomorphic, amalgamate_p_strong_delta, extract_pair_table, p_isomorphic, supp,
    validate_p_condition, validate_ranked_family, validate_strong_input, RankedFamily,
};
use hsforce::space::{
    basic_nbhd, is_left_separated, kill_left_separation, level_structure, merge_chain, validate_chain,
    GenericApproximation, SeparatedSequence,
};
use hsforce::delta::check_strong_witness;
use hsforce::{find_isomorphism, validate_condition, Condition, Error, OrderIso, PairTable};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

pub mod error;
pub mod schema;
pub mod suite;

pub use error::{CliError, SchemaError};
use schema::*;

pub const TOOL: &str = "hsforce";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    /// --in condition [--in pair-table]
    Validate,
    /// --in condition --in condition --in pair-table
    Amalgamate,
    /// --in condition --in condition --in pair-table
    OracleExtend,
    /// --in ensemble --in pair-table
    DeltaCheck,
    /// --in ensemble
    DeltaSearch,
    /// --in family --in p-condition
    PforceValidate,
    /// --in family --in strong-input, or --in family --in p-condition --in p-condition
    PforceAmalgamate,
    /// --in p-chain
    PforceExtract,
    /// --in chain [--in pair-table]
    ChainMerge,
    /// --in chain [--in pair-table]
    Levels,
    /// --in chain --in sequence [--in pair-table]
    LeftSep,
    /// --in condition --in condition --in sequence --in pair-table
    Kill,
    /// no inputs
    Suite,
}

/// Witness mode flag, mirroring [`WitnessMode`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strong,
    Bs,
}

impl From<Mode> for WitnessMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Strong => WitnessMode::Strong,
            Mode::Bs => WitnessMode::Bs,
        }
    }
}

/// Everything a run depends on. Equal configurations give byte-identical
/// reports.
#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize)]
pub struct RunConfig {
    /// Input document; repeat in the order the verb expects.
    #[arg(long = "in", value_name = "FILE")]
    #[serde(rename = "in")]
    pub inputs: Vec<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed for `suite`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Universe size for `delta-search` and `pforce-extract`; defaults to one
    /// more than the largest ordinal in the input.
    #[arg(long)]
    pub universe: Option<u32>,
    /// Node budget for `delta-search`.
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = Mode::Strong)]
    pub mode: Mode,
    /// Largest universe `oracle-extend` will enumerate.
    #[arg(long, default_value_t = 7)]
    pub bound: u32,
    /// Percentage of the full instance counts run by `suite`.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..=100))]
    pub scale: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            out: None,
            seed: 0,
            universe: None,
            budget: 100_000,
            mode: Mode::Strong,
            bound: 7,
            scale: 100,
        }
    }
}

/// The exit status and report of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub report: Value,
}

enum Verdict {
    Holds(Value),
    Fails(Value),
    /// A precondition failed and the report lists why.
    Rejected(Value),
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn render(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn run(verb: Verb, config: &RunConfig) -> Outcome {
    let (status, code, result) = match dispatch(verb, config) {
        Ok(Verdict::Holds(r)) => ("ok", 0, r),
        Ok(Verdict::Fails(r)) => ("fail", 1, r),
        Ok(Verdict::Rejected(r)) => ("error", 2, r),
        Err(e) => ("error", 2, json!({ "error": e.to_string() })),
    };
    let report = json!({
        "tool": TOOL,
        "version": VERSION,
        "verb": verb,
        "config": config,
        "status": status,
        "exit": code,
        "result": result,
    });
    Outcome { code, report }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

fn convert<T>(path: &Path, r: Result<T, SchemaError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Schema { path: path.to_owned(), source })
}

/// Checks the number of `--in` flags against the verb's usage line.
fn arity(verb: Verb, config: &RunConfig, allowed: &[usize], usage: &str) -> Result<(), CliError> {
    if allowed.contains(&config.inputs.len()) {
        return Ok(());
    }
    let name = verb.to_possible_value().expect("verbs have names").get_name().to_owned();
    Err(CliError::Usage(format!("`{name}` expects {usage}, got {} input(s)", config.inputs.len())))
}

fn condition(path: &Path) -> Result<Condition, CliError> {
    convert(path, load::<ConditionDoc>(path)?.to_condition())
}

fn table(path: &Path) -> Result<PairTable, CliError> {
    convert(path, load::<PairTableDoc>(path)?.to_table())
}

fn family(path: &Path) -> Result<RankedFamily, CliError> {
    convert(path, load::<FamilyDoc>(path)?.to_family())
}

fn chain(path: &Path) -> Result<Vec<Condition>, CliError> {
    convert(path, load::<ChainDoc<ConditionDoc>>(path)?.to_chain())
}

fn sequence(path: &Path) -> Result<SeparatedSequence, CliError> {
    convert(path, load::<SequenceDoc>(path)?.to_sequence())
}

fn table_or_empty(path: Option<&PathBuf>, universe: u32) -> Result<PairTable, CliError> {
    path.map_or(Ok(PairTable::new(universe)), |p| table(p))
}

fn condition_doc(p: &Condition) -> Value {
    to_value(&ConditionDoc::from_condition(p))
}

fn iso(e: &OrderIso) -> Value {
    to_value(&e.pairs().collect::<Vec<_>>())
}

fn dispatch(verb: Verb, config: &RunConfig) -> Result<Verdict, CliError> {
    let inputs = &config.inputs;
    match verb {
        Verb::Validate => {
            arity(verb, config, &[1, 2], "--in <condition> [--in <pair-table>]")?;
            let p = condition(&inputs[0])?;
            let f = table_or_empty(inputs.get(1), p.universe())?;
            let report = validate_condition(&p, &f);
            let result = json!({ "violations": report.violations });
            Ok(if report.is_valid() { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
        Verb::Amalgamate => {
            arity(verb, config, &[3], "--in <condition> --in <condition> --in <pair-table>")?;
            let (p1, p2, f) = (condition(&inputs[0])?, condition(&inputs[1])?, table(&inputs[2])?);
            let e = find_isomorphism(&p1, &p2)
                .ok_or_else(|| Error::Precondition("the two conditions are not isomorphic".into()))?;
            match amalgamate_asymmetric(&p1, &p2, &e, &f) {
                Ok(q) => Ok(Verdict::Holds(json!({ "e": iso(&e), "q": condition_doc(&q) }))),
                Err(Error::Hypotheses(h)) => Ok(Verdict::Fails(json!({ "e": iso(&e), "hypotheses": h }))),
                Err(other) => Err(other.into()),
            }
        }
        Verb::OracleExtend => {
            arity(verb, config, &[3], "--in <condition> --in <condition> --in <pair-table>")?;
            let (p1, p2, f) = (condition(&inputs[0])?, condition(&inputs[1])?, table(&inputs[2])?);
            let found = brute_force_common_extension(&p1, &p2, &f, config.bound)?;
            // When the lemma applies, certify its amalgam with the oracle too.
            let amalgam = find_isomorphism(&p1, &p2).and_then(|e| amalgamate_asymmetric(&p1, &p2, &e, &f).ok());
            let certified = amalgam.as_ref().map(|q| oracle_accepts(q, &p1, &p2, &f));
            let result = json!({
                "extension": found.as_ref().map(condition_doc),
                "amalgam": amalgam.as_ref().map(condition_doc),
                "amalgam_certified": certified,
            });
            let holds = found.is_some() && certified != Some(false);
            Ok(if holds { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
        Verb::DeltaCheck => {
            arity(verb, config, &[2], "--in <ensemble> --in <pair-table>")?;
            let systems = delta_systems(&inputs[0])?;
            let f = table(&inputs[1])?;
            let verdicts: Vec<_> = systems.iter().map(|s| family_has_witness(&f, s, config.mode.into())).collect();
            let holds = verdicts.iter().all(|v| v.is_found());
            let result = json!({ "mode": config.mode, "systems": verdicts });
            Ok(if holds { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
        Verb::DeltaSearch => {
            arity(verb, config, &[1], "--in <ensemble>")?;
            let systems = delta_systems(&inputs[0])?;
            let largest = systems.iter().flat_map(|s| s.members().iter().filter_map(|m| m.max())).max();
            let n = config.universe.unwrap_or(largest.map_or(0, |x| x + 1));
            Ok(match search_pair_table(n, &systems, config.mode.into(), config.budget)? {
                SearchOutcome::Found { table, nodes } => Verdict::Holds(json!({
                    "status": "found",
                    "nodes": nodes,
                    "table": PairTableDoc::from_table(&table),
                })),
                SearchOutcome::Unsatisfiable { system, nodes } => {
                    Verdict::Fails(json!({ "status": "unsatisfiable", "system": system, "nodes": nodes }))
                }
                SearchOutcome::Exhausted { nodes } => Verdict::Fails(json!({ "status": "exhausted", "nodes": nodes })),
            })
        }
        Verb::PforceValidate => {
            arity(verb, config, &[2], "--in <family> --in <p-condition>")?;
            let fam = family(&inputs[0])?;
            let p = convert(&inputs[1], load::<PConditionDoc>(&inputs[1])?.to_p_condition())?;
            let fam_report = validate_ranked_family(&fam);
            if !fam_report.is_valid() {
                return Ok(Verdict::Fails(json!({ "family_violations": fam_report.violations, "violations": null })));
            }
            let report = validate_p_condition(&p, &fam);
            let holds = report.is_valid();
            let support = holds.then(|| supp(&p, &fam));
            let result = json!({ "family_violations": [], "violations": report.violations, "support": support });
            Ok(if holds { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
        Verb::PforceAmalgamate => {
            arity(verb, config, &[2, 3], "--in <family> --in <strong-input> | --in <family> --in <p-condition> --in <p-condition>")?;
            let fam = family(&inputs[0])?;
            let fam_report = validate_ranked_family(&fam);
            if !fam_report.is_valid() {
                return Ok(Verdict::Rejected(json!({ "family_violations": fam_report.violations })));
            }
            if inputs.len() == 3 {
                let p = convert(&inputs[1], load::<PConditionDoc>(&inputs[1])?.to_p_condition())?;
                let q = convert(&inputs[2], load::<PConditionDoc>(&inputs[2])?.to_p_condition())?;
                let pi = p_isomorphic(&p, &q, &fam)
                    .ok_or_else(|| Error::Precondition("the two P-conditions are not isomorphic".into()))?;
                let r = amalgamate_p_isomorphic(&p, &q, &pi, &fam)?;
                return Ok(Verdict::Holds(json!({ "pi": iso(&pi), "r": PConditionDoc::from_p_condition(&r) })));
            }
            let input = convert(&inputs[1], load::<StrongInputDoc>(&inputs[1])?.to_input())?;
            let violations = validate_strong_input(&input, &fam);
            if !violations.is_empty() {
                return Ok(Verdict::Rejected(json!({ "violations": violations })));
            }
            let r = amalgamate_p_strong_delta(&input, &fam)?;
            let extracted = extract_pair_table(&[input.q.clone(), r.clone()], fam.universe())?;
            let e = OrderIso::canonical(&input.a, &input.b).expect("validated inputs have equal sizes");
            let witness = check_strong_witness(&extracted, &input.a, &input.b, &e)?;
            let result = json!({ "r": PConditionDoc::from_p_condition(&r), "witness": witness });
            Ok(if witness.ok() { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
        Verb::PforceExtract => {
            arity(verb, config, &[1], "--in <p-chain>")?;
            let ps = convert(&inputs[0], load::<ChainDoc<PConditionDoc>>(&inputs[0])?.to_p_chain())?;
            let largest = ps.iter().filter_map(|p| p.a().max()).max();
            let n = config.universe.unwrap_or(largest.map_or(0, |x| x + 1));
            let f = extract_pair_table(&ps, n)?;
            Ok(Verdict::Holds(json!({ "table": PairTableDoc::from_table(&f) })))
        }
        Verb::ChainMerge | Verb::Levels => {
            arity(verb, config, &[1, 2], "--in <chain> [--in <pair-table>]")?;
            let g = match checked_merge(config, 1)? {
                Ok(g) => g,
                Err(failure) => return Ok(Verdict::Fails(failure)),
            };
            Ok(Verdict::Holds(if verb == Verb::Levels {
                json!({ "levels": LevelsDoc::from_report(&level_structure(&g)) })
            } else {
                json!({ "approximation": ApproximationDoc::from_approximation(&g) })
            }))
        }
        Verb::LeftSep => {
            arity(verb, config, &[2, 3], "--in <chain> --in <sequence> [--in <pair-table>]")?;
            let g = match checked_merge(config, 2)? {
                Ok(g) => g,
                Err(failure) => return Ok(Verdict::Fails(failure)),
            };
            let seq = sequence(&inputs[1])?;
            if is_left_separated(&g, &seq)? {
                Ok(Verdict::Holds(json!({ "left_separated": true, "witness": null })))
            } else {
                let (alpha, beta) = unseparated_pair(&g, &seq)?;
                Ok(Verdict::Fails(json!({ "left_separated": false, "witness": { "alpha": alpha, "beta": beta } })))
            }
        }
        Verb::Kill => {
            arity(verb, config, &[4], "--in <condition> --in <condition> --in <sequence> --in <pair-table>")?;
            let (pa, pb) = (condition(&inputs[0])?, condition(&inputs[1])?);
            let seq = sequence(&inputs[2])?;
            let f = table(&inputs[3])?;
            if seq.points.len() != 2 || seq.guards.len() != 2 {
                return Err(CliError::Usage("`kill` expects a sequence of exactly two tuples".into()));
            }
            let e = find_isomorphism(&pa, &pb)
                .ok_or_else(|| Error::Precondition("the two conditions are not isomorphic".into()))?;
            match kill_left_separation(&pa, &pb, &e, &seq.points[0], &seq.points[1], &seq.guards[1], &f) {
                Ok((q, verdict)) => {
                    let result = json!({ "e": iso(&e), "q": condition_doc(&q), "verdict": verdict });
                    Ok(if verdict.killed { Verdict::Holds(result) } else { Verdict::Fails(result) })
                }
                Err(Error::Hypotheses(h)) => Ok(Verdict::Fails(json!({ "e": iso(&e), "hypotheses": h }))),
                Err(other) => Err(other.into()),
            }
        }
        Verb::Suite => {
            arity(verb, config, &[0], "no inputs")?;
            let report = suite::run_suite(config.seed, config.scale, config.budget);
            let result = to_value(&report);
            Ok(if report.passed { Verdict::Holds(result) } else { Verdict::Fails(result) })
        }
    }
}

fn delta_systems(path: &Path) -> Result<Vec<hsforce::delta::DeltaSystem>, CliError> {
    let families = convert(path, load::<EnsembleDoc>(path)?.to_families())?;
    families
        .iter()
        .enumerate()
        .map(|(k, fam)| {
            recognize_delta_system(fam).ok_or_else(|| CliError::Schema {
                path: path.to_owned(),
                source: SchemaError::new(format!("systems[{k}]"), "not a Δ-system of equal-size distinct members"),
            })
        })
        .collect()
}

/// Validates the chain in `--in` 0 against the pair table in `--in
/// table_at` (or the empty table) and merges it. A failed validation comes
/// back as the report of the failure.
fn checked_merge(config: &RunConfig, table_at: usize) -> Result<Result<GenericApproximation, Value>, CliError> {
    let ps = chain(&config.inputs[0])?;
    let universe = ps.first().map_or(0, Condition::universe);
    let f = table_or_empty(config.inputs.get(table_at), universe)?;
    let report = validate_chain(&ps, &f);
    if !report.is_valid() {
        return Ok(Err(json!({ "violations": report.violations })));
    }
    Ok(Ok(merge_chain(&ps)?))
}

/// The first `(α, β)`, by `β` then `α`, whose separation fails.
fn unseparated_pair(g: &GenericApproximation, seq: &SeparatedSequence) -> Result<(usize, usize), CliError> {
    for beta in 0..seq.points.len() {
        let nbhds = seq.points[beta]
            .iter()
            .zip(&seq.guards[beta])
            .map(|(&x, guards)| basic_nbhd(g, x, guards))
            .collect::<Result<Vec<_>, _>>()?;
        for alpha in 0..beta {
            if seq.points[alpha].iter().zip(&nbhds).all(|(&x, u)| u.contains(x)) {
                return Ok((alpha, beta));
            }
        }
    }
    Err(Error::InvariantFault("no unseparated pair in a sequence that is not left-separated".into()).into())
}

/// Runs `verb` and writes its report to `--out` or standard output.
pub fn execute(verb: Verb, config: &RunConfig) -> u8 {
    let outcome = run(verb, config);
    let text = render(&outcome.report);
    match &config.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    if outcome.code == 2 {
        if let Some(message) = outcome.report["result"]["error"].as_str() {
            eprintln!("error: {message}");
        }
    }
    outcome.code
}
