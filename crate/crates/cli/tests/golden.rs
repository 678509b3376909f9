mod common;

use std::fs;

use common::{hsforce, schema_fixtures, CASES};
use hsforce_cli::schema::{reserialize, DocKind};
use serde_json::{json, Value};

#[test]
fn golden_reports_match() {
    let failures: Vec<String> = CASES.iter().filter_map(|c| c.check().err()).collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

fn result_of(name: &str) -> Value {
    let case = CASES.iter().find(|c| c.name == name).expect("known case");
    let report: Value = serde_json::from_str(&fs::read_to_string(case.expected_path()).unwrap()).unwrap();
    assert_eq!(report["exit"], json!(case.exit));
    report["result"].clone()
}

// The values below are worked out by hand from the definitions; they pin
// the golden files to the mathematics rather than to whatever the binary
// printed when they were written.

#[test]
fn worked_amalgam_is_the_hand_computed_one() {
    let r = result_of("amalgamate-worked");
    assert_eq!(r["e"], json!([[0, 0], [1, 2]]));
    assert_eq!(r["q"]["D"], json!([0, 1, 2]));
    assert_eq!(r["q"]["h"], json!({"0": [0], "1": [0, 1], "2": [0, 1, 2]}));
    assert_eq!(r["q"]["i"], json!([{"pair": [1, 2], "value": [0]}]));
}

#[test]
fn violator_names_pair_one_two_and_zeta_zero() {
    let r = result_of("validate-violator");
    assert_eq!(r["violations"], json!([{"kind": "uncovered", "xi": 1, "eta": 2, "zeta": 0, "clause": "3b"}]));
    assert_eq!(result_of("validate-violator-repaired")["violations"], json!([]));
}

#[test]
fn empty_cross_value_breaks_b_ii() {
    let r = result_of("amalgamate-empty-f");
    assert_eq!(r["hypotheses"]["cond_b_failures"], json!([{"zeta": 0, "xi": 1, "eta": 2, "clause": "B(ii)"}]));
}

#[test]
fn clause_d_pair() {
    assert_eq!(result_of("pforce-validate-clause-d")["support"], json!([0, 1, 2, 3]));
    let r = result_of("pforce-validate-clause-d-invalid");
    assert_eq!(r["violations"], json!([{"kind": "value_not_below_min", "xi": 1, "eta": 3, "element": 2}]));
}

#[test]
fn mid_cut_amalgam() {
    // a = {2}, b = {4}: A = a ∩ 2 = ∅, B = C = ∅ (the root is empty), so
    // h({2,4}) = ∅ and r is the plain union of q and s.
    let r = result_of("pforce-amalgamate-mid-cut");
    assert_eq!(r["r"], json!({"a": [1, 2, 4], "f": [{"pair": [1, 2], "value": [0]}, {"pair": [1, 4], "value": [0]}], "A": [0, 1]}));
    assert_eq!(r["witness"]["failed_clauses"], json!([]));
    let rejected = result_of("pforce-amalgamate-no-x0");
    assert_eq!(rejected["violations"][0]["kind"], json!("x0_not_in_q"));
    let table = result_of("pforce-extract-mid-cut");
    assert_eq!(table["table"]["entries"], json!([{"pair": [1, 2], "value": [0]}, {"pair": [1, 4], "value": [0]}]));
}

#[test]
fn kill_and_levels_on_the_worked_chain() {
    let kill = result_of("kill-worked-guarded");
    assert_eq!(kill["verdict"], json!({"coordinates": [{"x_alpha": 1, "x_beta": 2, "inside": true}], "killed": true}));
    // 1 ∈ h(2) = {0,1,2}, so (0, 1) is not separated.
    assert_eq!(result_of("left-sep-worked")["witness"], json!({"alpha": 0, "beta": 1}));
    let levels = result_of("levels-worked")["levels"].clone();
    assert_eq!(levels, json!({"levels": {"0": 0, "1": 1, "2": 2}, "height": 3, "width": 1}));
}

#[test]
fn nested_ensemble_is_unsatisfiable() {
    assert_eq!(result_of("delta-search-nested"), json!({"status": "unsatisfiable", "system": 0, "nodes": 0}));
    let found = result_of("delta-search-lower-pair");
    assert_eq!(found["table"]["entries"], json!([{"pair": [1, 2], "value": [0]}]));
}

#[test]
fn parse_errors_name_the_field() {
    let r = result_of("validate-missing-h")["error"].as_str().unwrap().to_owned();
    assert!(r.contains("missing field `h`") && r.contains("line 5"), "{r}");
    let r = result_of("validate-unsorted-domain")["error"].as_str().unwrap().to_owned();
    assert!(r.contains("field `D`"), "{r}");
}

#[test]
fn fixtures_round_trip_bit_exactly() {
    let fixtures = schema_fixtures();
    assert!(fixtures.len() >= 20);
    for (path, kind) in fixtures {
        let text = fs::read_to_string(&path).unwrap();
        let kind = DocKind::from_name(kind).unwrap();
        assert_eq!(reserialize(kind, &text).unwrap(), text, "{}", path.display());
    }
}

#[test]
fn reports_go_to_out_when_asked() {
    let dir = std::env::temp_dir().join(format!("hsforce-golden-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("report.json");
    let run = hsforce(&["validate", "--in", "two-point.condition.json", "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], json!("ok"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hsforce(&["amalgamate", "--in", "worked-p1.condition.json"]).code, 2);
    assert_eq!(hsforce(&["no-such-verb"]).code, 2);
    assert_eq!(hsforce(&["validate", "--in", "does-not-exist.json"]).code, 2);
}
