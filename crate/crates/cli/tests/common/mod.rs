#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// A golden case: `hsforce <verb> --in <file>... <extra>...` run inside the
/// fixtures directory, with its exit status and expected report in
/// `expected/<name>.json`.
pub struct Case {
    pub name: &'static str,
    pub verb: &'static str,
    pub inputs: &'static [&'static str],
    pub extra: &'static [&'static str],
    pub exit: i32,
}

const fn case(
    name: &'static str,
    verb: &'static str,
    inputs: &'static [&'static str],
    extra: &'static [&'static str],
    exit: i32,
) -> Case {
    Case { name, verb, inputs, extra, exit }
}

pub const CASES: &[Case] = &[
    case("validate-two-point", "validate", &["two-point.condition.json"], &[], 0),
    case("validate-worked-q", "validate", &["worked-q.condition.json", "worked-f.pair-table.json"], &[], 0),
    case("validate-violator", "validate", &["violator.condition.json"], &[], 1),
    case("validate-violator-repaired", "validate", &["violator-repaired.condition.json", "worked-f.pair-table.json"], &[], 0),
    case("validate-missing-h", "validate", &["invalid/missing-h.json"], &[], 2),
    case("validate-unsorted-domain", "validate", &["invalid/unsorted-domain.json"], &[], 2),
    case(
        "amalgamate-worked",
        "amalgamate",
        &["worked-p1.condition.json", "worked-p2.condition.json", "worked-f.pair-table.json"],
        &[],
        0,
    ),
    case(
        "amalgamate-empty-f",
        "amalgamate",
        &["worked-p1.condition.json", "worked-p2.condition.json", "empty.pair-table.json"],
        &[],
        1,
    ),
    case(
        "amalgamate-upper-first",
        "amalgamate",
        &["worked-p2.condition.json", "worked-p1.condition.json", "worked-f.pair-table.json"],
        &[],
        2,
    ),
    case(
        "oracle-extend-worked",
        "oracle-extend",
        &["worked-p1.condition.json", "worked-p2.condition.json", "worked-f.pair-table.json"],
        &[],
        0,
    ),
    case("delta-check-lower-pair", "delta-check", &["lower-pair.ensemble.json", "worked-f.pair-table.json"], &[], 0),
    case("delta-check-empty-f", "delta-check", &["lower-pair.ensemble.json", "empty.pair-table.json"], &[], 1),
    case("delta-search-lower-pair", "delta-search", &["lower-pair.ensemble.json"], &[], 0),
    case("delta-search-nested", "delta-search", &["nested.ensemble.json"], &[], 1),
    case("pforce-validate-clause-d", "pforce-validate", &["clause-d.family.json", "clause-d-valid.p-condition.json"], &[], 0),
    case(
        "pforce-validate-clause-d-invalid",
        "pforce-validate",
        &["clause-d.family.json", "clause-d-invalid.p-condition.json"],
        &[],
        1,
    ),
    case("pforce-amalgamate-mid-cut", "pforce-amalgamate", &["mid-cut.family.json", "mid-cut.strong-input.json"], &[], 0),
    case(
        "pforce-amalgamate-no-x0",
        "pforce-amalgamate",
        &["mid-cut.family.json", "mid-cut-no-x0.strong-input.json"],
        &[],
        2,
    ),
    case("pforce-extract-mid-cut", "pforce-extract", &["mid-cut.p-chain.json"], &["--universe", "6"], 0),
    case("chain-merge-worked", "chain-merge", &["worked.chain.json", "worked-f.pair-table.json"], &[], 0),
    case("levels-worked", "levels", &["worked.chain.json", "worked-f.pair-table.json"], &[], 0),
    case(
        "left-sep-worked",
        "left-sep",
        &["worked.chain.json", "worked-kill.sequence.json", "worked-f.pair-table.json"],
        &[],
        1,
    ),
    case(
        "kill-worked",
        "kill",
        &["worked-p1.condition.json", "worked-p2.condition.json", "worked-kill.sequence.json", "worked-f.pair-table.json"],
        &[],
        0,
    ),
    case(
        "kill-worked-guarded",
        "kill",
        &[
            "worked-p1.condition.json",
            "worked-p2.condition.json",
            "worked-kill-guarded.sequence.json",
            "worked-f.pair-table.json",
        ],
        &[],
        0,
    ),
];

pub struct Run {
    pub code: i32,
    pub stdout: String,
}

pub fn hsforce(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_hsforce"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("the hsforce binary runs");
    Run { code: out.status.code().expect("exit status"), stdout: String::from_utf8(out.stdout).expect("UTF-8 report") }
}

impl Case {
    pub fn args(&self) -> Vec<&'static str> {
        let mut args = vec![self.verb];
        for input in self.inputs {
            args.extend(["--in", input]);
        }
        args.extend(self.extra);
        args
    }

    pub fn expected_path(&self) -> PathBuf {
        fixtures().join("expected").join(format!("{}.json", self.name))
    }

    /// Runs the case and describes any mismatch. With `BLESS=1` in the
    /// environment the expected report is rewritten instead.
    pub fn check(&self) -> Result<(), String> {
        let run = hsforce(&self.args());
        if run.code != self.exit {
            return Err(format!("{}: exit {} instead of {}\n{}", self.name, run.code, self.exit, run.stdout));
        }
        if std::env::var_os("BLESS").is_some() {
            fs::write(self.expected_path(), &run.stdout).expect("writable fixtures");
            return Ok(());
        }
        let expected = fs::read_to_string(self.expected_path()).map_err(|e| format!("{}: {e}", self.name))?;
        if run.stdout != expected {
            return Err(format!("{}: report differs from the golden file\n{}", self.name, run.stdout));
        }
        Ok(())
    }
}

/// Every schema fixture, with its kind taken from the `name.<kind>.json`
/// suffix.
pub fn schema_fixtures() -> Vec<(PathBuf, &'static str)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(fixtures()).expect("fixtures directory") {
        let path = entry.expect("directory entry").path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(stem) = name.strip_suffix(".json") else { continue };
        let kind = stem.rsplit_once('.').map(|(_, k)| k).unwrap_or_else(|| panic!("{name} has no kind suffix"));
        let kind = hsforce_cli::schema::DocKind::from_name(kind).unwrap_or_else(|| panic!("{name}: unknown kind"));
        out.push((path, kind.name()));
    }
    out.sort();
    out
}
