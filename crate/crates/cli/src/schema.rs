//! JSON documents and their conversion to and from library values.
//!
//! Every document is canonical: sets are strictly increasing integer arrays,
//! pairs are written `[ξ, η]` with `ξ < η`, pair lists are sorted and carry
//! only nonempty values, and ordinals used as map keys are decimal strings.
//! Parsing rejects anything that would not serialize back byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use hsforce::side::{PCondition, RankedFamily, StrongDeltaAmalgamInput};
use hsforce::space::{GenericApproximation, LevelReport, SeparatedSequence};
use hsforce::{Condition, FinSet, Ordinal, PairTable};
use serde::{Deserialize, Serialize};

use crate::error::SchemaError;

type Pairs = BTreeMap<(Ordinal, Ordinal), FinSet>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairValue {
    pub pair: [Ordinal; 2],
    pub value: Vec<Ordinal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionDoc {
    pub universe: u32,
    #[serde(rename = "D")]
    pub domain: Vec<Ordinal>,
    pub h: BTreeMap<String, Vec<Ordinal>>,
    pub i: Vec<PairValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairTableDoc {
    pub universe: u32,
    pub entries: Vec<PairValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub set: Vec<Ordinal>,
    pub rank: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub universe: u32,
    pub members: Vec<MemberDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PConditionDoc {
    pub a: Vec<Ordinal>,
    pub f: Vec<PairValue>,
    #[serde(rename = "A")]
    pub members: Vec<usize>,
}

/// An ordered list of documents: conditions for `chain-merge` and friends,
/// P-conditions for `pforce-extract`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc<T> {
    pub conditions: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDoc {
    pub systems: Vec<Vec<Vec<Ordinal>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDoc {
    pub tuples: Vec<Vec<Ordinal>>,
    pub guards: Vec<Vec<Vec<Ordinal>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrongInputDoc {
    pub q: PConditionDoc,
    pub s: PConditionDoc,
    pub a: Vec<Ordinal>,
    pub b: Vec<Ordinal>,
    #[serde(rename = "X0")]
    pub x0: usize,
    pub delta: u32,
    #[serde(rename = "Z")]
    pub z: Vec<Ordinal>,
}

/// Output only: a merged chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproximationDoc {
    pub universe: u32,
    pub has_infinity: bool,
    pub h: BTreeMap<String, Vec<Ordinal>>,
}

/// Output only: the level structure of a merged chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelsDoc {
    pub levels: BTreeMap<String, u32>,
    pub height: u32,
    pub width: usize,
}

fn set(field: &str, elements: &[Ordinal]) -> Result<FinSet, SchemaError> {
    FinSet::from_sorted(elements.to_vec()).map_err(|e| SchemaError::new(field, format!("{e}; sets are strictly increasing")))
}

fn key(field: &str, text: &str) -> Result<Ordinal, SchemaError> {
    let x: Ordinal = text.parse().map_err(|_| SchemaError::new(field, format!("key {text:?} is not an ordinal")))?;
    if x.to_string() != text {
        return Err(SchemaError::new(field, format!("key {text:?} is not in decimal canonical form")));
    }
    Ok(x)
}

fn pairs(field: &str, list: &[PairValue]) -> Result<Pairs, SchemaError> {
    let mut out = BTreeMap::new();
    let mut last = None;
    for (k, pv) in list.iter().enumerate() {
        let [x, y] = pv.pair;
        if x >= y {
            return Err(SchemaError::new(format!("{field}[{k}].pair"), "pairs are written [smaller, larger]"));
        }
        if last.is_some_and(|l| l >= (x, y)) {
            return Err(SchemaError::new(format!("{field}[{k}].pair"), "pairs must be listed once, in increasing order"));
        }
        last = Some((x, y));
        let value = set(&format!("{field}[{k}].value"), &pv.value)?;
        if value.is_empty() {
            return Err(SchemaError::new(format!("{field}[{k}].value"), "empty values are omitted, not listed"));
        }
        out.insert((x, y), value);
    }
    Ok(out)
}

fn pair_list<'a>(entries: impl Iterator<Item = ((Ordinal, Ordinal), &'a FinSet)>) -> Vec<PairValue> {
    entries.map(|((x, y), v)| PairValue { pair: [x, y], value: v.as_slice().to_vec() }).collect()
}

fn key_map<V>(entries: impl Iterator<Item = (Ordinal, V)>) -> BTreeMap<String, V> {
    entries.map(|(x, v)| (x.to_string(), v)).collect()
}

impl ConditionDoc {
    pub fn to_condition(&self) -> Result<Condition, SchemaError> {
        let domain = set("D", &self.domain)?;
        let mut h = BTreeMap::new();
        for (text, value) in &self.h {
            let field = format!("h[{text:?}]");
            h.insert(key(&field, text)?, set(&field, value)?);
        }
        let i = pairs("i", &self.i)?;
        Ok(Condition::from_parts(self.universe, domain, h, i))
    }

    pub fn from_condition(p: &Condition) -> Self {
        ConditionDoc {
            universe: p.universe(),
            domain: p.domain().as_slice().to_vec(),
            h: key_map(p.h_entries().map(|(x, v)| (x, v.as_slice().to_vec()))),
            i: pair_list(p.i_entries()),
        }
    }
}

impl PairTableDoc {
    pub fn to_table(&self) -> Result<PairTable, SchemaError> {
        let mut table = PairTable::new(self.universe);
        for ((x, y), value) in pairs("entries", &self.entries)? {
            if y >= self.universe {
                return Err(SchemaError::new("entries", format!("pair ({x}, {y}) leaves the universe {}", self.universe)));
            }
            table.set(x, y, value).map_err(|e| SchemaError::new("entries", e))?;
        }
        Ok(table)
    }

    pub fn from_table(f: &PairTable) -> Self {
        PairTableDoc { universe: f.universe(), entries: pair_list(f.entries()) }
    }
}

impl FamilyDoc {
    pub fn to_family(&self) -> Result<RankedFamily, SchemaError> {
        let mut members = Vec::new();
        for (k, m) in self.members.iter().enumerate() {
            members.push(set(&format!("members[{k}].set"), &m.set)?);
        }
        Ok(RankedFamily::new(self.universe, members, self.members.iter().map(|m| m.rank).collect()))
    }

    pub fn from_family(family: &RankedFamily) -> Self {
        let members = family
            .members()
            .iter()
            .zip(family.ranks())
            .map(|(s, &rank)| MemberDoc { set: s.as_slice().to_vec(), rank })
            .collect();
        FamilyDoc { universe: family.universe(), members }
    }
}

impl PConditionDoc {
    pub fn to_p_condition(&self) -> Result<PCondition, SchemaError> {
        let a = set("a", &self.a)?;
        let f = pairs("f", &self.f)?;
        if self.members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SchemaError::new("A", "member indices are strictly increasing"));
        }
        let members: BTreeSet<usize> = self.members.iter().copied().collect();
        Ok(PCondition::new(a, f, members))
    }

    pub fn from_p_condition(p: &PCondition) -> Self {
        PConditionDoc {
            a: p.a().as_slice().to_vec(),
            f: pair_list(p.f_entries()),
            members: p.members().iter().copied().collect(),
        }
    }
}

fn nested<T>(prefix: &str, r: Result<T, SchemaError>) -> Result<T, SchemaError> {
    r.map_err(|e| SchemaError::new(format!("{prefix}.{}", e.field), e.message))
}

impl ChainDoc<ConditionDoc> {
    pub fn to_chain(&self) -> Result<Vec<Condition>, SchemaError> {
        let each = self.conditions.iter().enumerate();
        each.map(|(k, c)| nested(&format!("conditions[{k}]"), c.to_condition())).collect()
    }

    pub fn from_chain(chain: &[Condition]) -> Self {
        ChainDoc { conditions: chain.iter().map(ConditionDoc::from_condition).collect() }
    }
}

impl ChainDoc<PConditionDoc> {
    pub fn to_p_chain(&self) -> Result<Vec<PCondition>, SchemaError> {
        let each = self.conditions.iter().enumerate();
        each.map(|(k, c)| nested(&format!("conditions[{k}]"), c.to_p_condition())).collect()
    }

    pub fn from_p_chain(chain: &[PCondition]) -> Self {
        ChainDoc { conditions: chain.iter().map(PConditionDoc::from_p_condition).collect() }
    }
}

impl EnsembleDoc {
    /// The systems as lists of sets; whether each is a Δ-system is up to
    /// the caller.
    pub fn to_families(&self) -> Result<Vec<Vec<FinSet>>, SchemaError> {
        let mut out = Vec::new();
        for (j, sys) in self.systems.iter().enumerate() {
            let mut members = Vec::new();
            for (k, m) in sys.iter().enumerate() {
                members.push(set(&format!("systems[{j}][{k}]"), m)?);
            }
            out.push(members);
        }
        Ok(out)
    }

    pub fn from_families(families: &[Vec<FinSet>]) -> Self {
        let systems = families.iter().map(|f| f.iter().map(|m| m.as_slice().to_vec()).collect()).collect();
        EnsembleDoc { systems }
    }
}

impl SequenceDoc {
    pub fn to_sequence(&self) -> Result<SeparatedSequence, SchemaError> {
        let mut guards = Vec::new();
        for (j, row) in self.guards.iter().enumerate() {
            let mut out = Vec::new();
            for (k, g) in row.iter().enumerate() {
                out.push(set(&format!("guards[{j}][{k}]"), g)?);
            }
            guards.push(out);
        }
        Ok(SeparatedSequence { points: self.tuples.clone(), guards })
    }

    pub fn from_sequence(seq: &SeparatedSequence) -> Self {
        let guards = seq.guards.iter().map(|row| row.iter().map(|g| g.as_slice().to_vec()).collect()).collect();
        SequenceDoc { tuples: seq.points.clone(), guards }
    }
}

impl StrongInputDoc {
    pub fn to_input(&self) -> Result<StrongDeltaAmalgamInput, SchemaError> {
        Ok(StrongDeltaAmalgamInput {
            q: nested("q", self.q.to_p_condition())?,
            s: nested("s", self.s.to_p_condition())?,
            a: set("a", &self.a)?,
            b: set("b", &self.b)?,
            x0: self.x0,
            delta: self.delta,
            z: set("Z", &self.z)?,
        })
    }

    pub fn from_input(input: &StrongDeltaAmalgamInput) -> Self {
        StrongInputDoc {
            q: PConditionDoc::from_p_condition(&input.q),
            s: PConditionDoc::from_p_condition(&input.s),
            a: input.a.as_slice().to_vec(),
            b: input.b.as_slice().to_vec(),
            x0: input.x0,
            delta: input.delta,
            z: input.z.as_slice().to_vec(),
        }
    }
}

impl ApproximationDoc {
    pub fn from_approximation(g: &GenericApproximation) -> Self {
        ApproximationDoc {
            universe: g.universe(),
            has_infinity: g.has_infinity(),
            h: key_map(g.entries().map(|(x, v)| (x, v.as_slice().to_vec()))),
        }
    }
}

impl LevelsDoc {
    pub fn from_report(report: &LevelReport) -> Self {
        LevelsDoc {
            levels: key_map(report.levels.iter().map(|(&x, &l)| (x, l))),
            height: report.height,
            width: report.width,
        }
    }
}

/// The schema a fixture file follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    Condition,
    PairTable,
    Family,
    PCondition,
    Chain,
    PChain,
    Ensemble,
    Sequence,
    StrongInput,
}

impl DocKind {
    pub const ALL: [DocKind; 9] = [
        DocKind::Condition,
        DocKind::PairTable,
        DocKind::Family,
        DocKind::PCondition,
        DocKind::Chain,
        DocKind::PChain,
        DocKind::Ensemble,
        DocKind::Sequence,
        DocKind::StrongInput,
    ];

    /// The name used in fixture file suffixes, `name.<kind>.json`.
    pub fn name(self) -> &'static str {
        match self {
            DocKind::Condition => "condition",
            DocKind::PairTable => "pair-table",
            DocKind::Family => "family",
            DocKind::PCondition => "p-condition",
            DocKind::Chain => "chain",
            DocKind::PChain => "p-chain",
            DocKind::Ensemble => "ensemble",
            DocKind::Sequence => "sequence",
            DocKind::StrongInput => "strong-input",
        }
    }

    pub fn from_name(name: &str) -> Option<DocKind> {
        DocKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

fn json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError::new("<document>", e))
}

fn canonical<T: Serialize>(doc: &T) -> String {
    crate::render(&serde_json::to_value(doc).expect("documents serialize"))
}

/// Parses `text` as a document of the given kind into library values and
/// serializes those values back.
pub fn reserialize(kind: DocKind, text: &str) -> Result<String, SchemaError> {
    Ok(match kind {
        DocKind::Condition => canonical(&ConditionDoc::from_condition(&json::<ConditionDoc>(text)?.to_condition()?)),
        DocKind::PairTable => canonical(&PairTableDoc::from_table(&json::<PairTableDoc>(text)?.to_table()?)),
        DocKind::Family => canonical(&FamilyDoc::from_family(&json::<FamilyDoc>(text)?.to_family()?)),
        DocKind::PCondition => {
            canonical(&PConditionDoc::from_p_condition(&json::<PConditionDoc>(text)?.to_p_condition()?))
        }
        DocKind::Chain => canonical(&ChainDoc::from_chain(&json::<ChainDoc<ConditionDoc>>(text)?.to_chain()?)),
        DocKind::PChain => canonical(&ChainDoc::from_p_chain(&json::<ChainDoc<PConditionDoc>>(text)?.to_p_chain()?)),
        DocKind::Ensemble => canonical(&EnsembleDoc::from_families(&json::<EnsembleDoc>(text)?.to_families()?)),
        DocKind::Sequence => canonical(&SequenceDoc::from_sequence(&json::<SequenceDoc>(text)?.to_sequence()?)),
        DocKind::StrongInput => canonical(&StrongInputDoc::from_input(&json::<StrongInputDoc>(text)?.to_input()?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_round_trip() {
        let text = r#"{"universe": 3, "D": [0, 2], "h": {"0": [0], "2": [0, 2]}, "i": [{"pair": [0, 2], "value": []}]}"#;
        let err = reserialize(DocKind::Condition, text).unwrap_err();
        assert_eq!(err.field, "i[0].value");

        let text = r#"{"universe": 3, "D": [0, 2], "h": {"0": [0], "2": [0, 2]}, "i": []}"#;
        let once = reserialize(DocKind::Condition, text).unwrap();
        assert_eq!(reserialize(DocKind::Condition, &once).unwrap(), once);
        assert!(once.starts_with("{\n  \"D\": [\n"));
    }

    #[test]
    fn non_canonical_input_is_named() {
        let text = r#"{"universe": 3, "D": [2, 0], "h": {}, "i": []}"#;
        assert_eq!(reserialize(DocKind::Condition, text).unwrap_err().field, "D");
        let text = r#"{"universe": 3, "D": [0], "h": {"00": [0]}, "i": []}"#;
        assert_eq!(reserialize(DocKind::Condition, text).unwrap_err().field, "h[\"00\"]");
        let text = r#"{"universe": 4, "entries": [{"pair": [2, 1], "value": [0]}]}"#;
        assert_eq!(reserialize(DocKind::PairTable, text).unwrap_err().field, "entries[0].pair");
        let text = r#"{"universe": 4, "entries": [{"pair": [1, 2], "value": [1]}]}"#;
        assert_eq!(reserialize(DocKind::PairTable, text).unwrap_err().field, "entries");
        let text = r#"{"a": [1], "f": [], "A": [1, 0]}"#;
        assert_eq!(reserialize(DocKind::PCondition, text).unwrap_err().field, "A");
    }

    #[test]
    fn serde_errors_carry_line_and_field() {
        let text = "{\n  \"universe\": 3,\n  \"D\": [0]\n}";
        let err = reserialize(DocKind::Condition, text).unwrap_err();
        assert!(err.message.contains("missing field `h`") && err.message.contains("line 4"), "{err}");
        let err = reserialize(DocKind::Family, r#"{"universe": 3, "members": [], "extra": 1}"#).unwrap_err();
        assert!(err.message.contains("unknown field `extra`"), "{err}");
    }

    #[test]
    fn nested_fields_are_prefixed() {
        let text = r#"{"conditions": [{"universe": 3, "D": [0], "h": {"0": [0]}, "i": []},
                                      {"universe": 3, "D": [1, 1], "h": {}, "i": []}]}"#;
        assert_eq!(reserialize(DocKind::Chain, text).unwrap_err().field, "conditions[1].D");
    }

    #[test]
    fn kinds_have_unique_names() {
        for kind in DocKind::ALL {
            assert_eq!(DocKind::from_name(kind.name()), Some(kind));
        }
    }
}
