//! Embedded example transcripts, their provenance tables, and a brute-force
//! matching oracle for tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::lexicon::SynonymLexicon;
use crate::semantics::{terms_match, SemanticStructure, Slot};
use crate::transcript::{parse_transcript, Transcript};

pub const FIXTURE_NAMES: [&str; 3] = ["subarray", "suture", "summary_case_a"];

const SUBARRAY: &str = include_str!("../../../fixtures/subarray.json");
const SUTURE: &str = include_str!("../../../fixtures/suture.json");
const SUMMARY_CASE_A: &str = include_str!("../../../fixtures/summary_case_a.json");
const SUBARRAY_PROVENANCE: &str = include_str!("../../../fixtures/subarray.provenance.tsv");
const SUTURE_PROVENANCE: &str = include_str!("../../../fixtures/suture.provenance.tsv");
const SUMMARY_CASE_A_PROVENANCE: &str = include_str!("../../../fixtures/summary_case_a.provenance.tsv");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture {0:?} (known: subarray, suture, summary_case_a)")]
    UnknownFixture(String),
    #[error("provenance line {line}: {message}")]
    Provenance { line: usize, message: String },
}

fn embedded(name: &str) -> Result<(&'static str, &'static str), FixtureError> {
    match name {
        "subarray" => Ok((SUBARRAY, SUBARRAY_PROVENANCE)),
        "suture" => Ok((SUTURE, SUTURE_PROVENANCE)),
        "summary_case_a" => Ok((SUMMARY_CASE_A, SUMMARY_CASE_A_PROVENANCE)),
        other => Err(FixtureError::UnknownFixture(other.to_string())),
    }
}

pub fn load_fixture(name: &str) -> Result<Transcript, FixtureError> {
    let (json, _) = embedded(name)?;
    Ok(parse_transcript(json.as_bytes()).expect("embedded fixtures are valid"))
}

pub fn fixture_provenance(name: &str) -> Result<ProvenanceTable, FixtureError> {
    let (_, tsv) = embedded(name)?;
    ProvenanceTable::parse(tsv)
}

/// How an utterance text came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TextStatus {
    /// Built from words the source dialog shows verbatim.
    Quoted,
    /// Only described by the source; wording is ours.
    Reconstructed,
    /// Invented for a scenario the source gives no dialog for.
    Synthetic,
}

impl FromStr for TextStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quoted" => Ok(TextStatus::Quoted),
            "reconstructed" => Ok(TextStatus::Reconstructed),
            "synthetic" => Ok(TextStatus::Synthetic),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

impl fmt::Display for TextStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TextStatus::Quoted => "quoted",
            TextStatus::Reconstructed => "reconstructed",
            TextStatus::Synthetic => "synthetic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProvenanceEntry {
    pub status: TextStatus,
    pub note: String,
}

/// `id <TAB> status <TAB> note` rows; `#` comments and blank lines ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProvenanceTable {
    pub entries: BTreeMap<String, ProvenanceEntry>,
}

impl ProvenanceTable {
    pub fn parse(text: &str) -> Result<Self, FixtureError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            let [id, status, note] = cols.as_slice() else {
                return Err(FixtureError::Provenance { line, message: "expected id, status and note".into() });
            };
            let status = status.trim().parse().map_err(|message| FixtureError::Provenance { line, message })?;
            entries.insert(id.trim().to_string(), ProvenanceEntry { status, note: note.trim().to_string() });
        }
        Ok(ProvenanceTable { entries })
    }

    pub fn status(&self, id: &str) -> Option<TextStatus> {
        self.entries.get(id).map(|e| e.status)
    }

    /// Ids whose text is built from verbatim source wording.
    pub fn quoted(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(_, e)| e.status == TextStatus::Quoted)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

pub const ORACLE_SLOT_LIMIT: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("slot {slot} holds {len} terms; the oracle enumerates at most {ORACLE_SLOT_LIMIT}")]
    SizeLimit { slot: Slot, len: usize },
}

/// Maximum matched-pair count found by trying every injective same-slot pairing.
pub fn brute_force_match_oracle(
    a: &SemanticStructure,
    b: &SemanticStructure,
    syn: &SynonymLexicon,
) -> Result<usize, OracleError> {
    let mut total = 0;
    for slot in Slot::ALL {
        let dedup = |s: &SemanticStructure| {
            let mut t = s.slot_terms(slot);
            t.sort();
            t.dedup();
            t
        };
        let (ta, tb) = (dedup(a), dedup(b));
        for len in [ta.len(), tb.len()] {
            if len > ORACLE_SLOT_LIMIT {
                return Err(OracleError::SizeLimit { slot, len });
            }
        }
        let mut used = vec![false; tb.len()];
        total += best_pairing(slot, &ta, &tb, 0, &mut used, syn);
    }
    Ok(total)
}

fn best_pairing(slot: Slot, a: &[String], b: &[String], i: usize, used: &mut [bool], syn: &SynonymLexicon) -> usize {
    if i == a.len() {
        return 0;
    }
    let mut best = best_pairing(slot, a, b, i + 1, used, syn);
    for j in 0..b.len() {
        if !used[j] && terms_match(slot, &a[i], &b[j], syn) {
            used[j] = true;
            best = best.max(1 + best_pairing(slot, a, b, i + 1, used, syn));
            used[j] = false;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::match_structures;
    use crate::transcript::validate_transcript;

    #[test]
    fn fixtures_load_with_expected_sizes() {
        assert_eq!(load_fixture("subarray").unwrap().utterances.len(), 19);
        assert_eq!(load_fixture("suture").unwrap().utterances.len(), 23);
        assert!(!load_fixture("summary_case_a").unwrap().utterances.is_empty());
        assert_eq!(load_fixture("nope"), Err(FixtureError::UnknownFixture("nope".into())));
    }

    #[test]
    fn fixtures_validate_cleanly() {
        for name in FIXTURE_NAMES {
            let t = load_fixture(name).unwrap();
            assert_eq!(validate_transcript(&t), vec![], "{name}");
        }
    }

    #[test]
    fn provenance_covers_every_utterance() {
        for name in FIXTURE_NAMES {
            let t = load_fixture(name).unwrap();
            let p = fixture_provenance(name).unwrap();
            for u in &t.utterances {
                assert!(p.status(&u.id).is_some(), "{name} {}", u.id);
            }
            assert_eq!(p.entries.len(), t.utterances.len(), "{name}");
        }
        let case_a = fixture_provenance("summary_case_a").unwrap();
        assert!(case_a.entries.values().all(|e| e.status == TextStatus::Synthetic));
    }

    #[test]
    fn provenance_rejects_bad_rows() {
        assert!(ProvenanceTable::parse("I1\tquoted").is_err());
        assert!(ProvenanceTable::parse("I1\tinvented\tx").is_err());
    }

    #[test]
    fn oracle_agrees_on_identity_and_limit() {
        let s: SemanticStructure = serde_json::from_str(r#"{"action":["sum","check"],"who":["all"]}"#).unwrap();
        let syn = SynonymLexicon::default();
        assert_eq!(brute_force_match_oracle(&s, &s, &syn), Ok(3));
        assert_eq!(match_structures(&s, &s, &syn).matched.len(), 3);
        let big: SemanticStructure =
            serde_json::from_str(r#"{"action":["a","b","c","d","e","f","g"]}"#).unwrap();
        assert_eq!(
            brute_force_match_oracle(&big, &s, &syn),
            Err(OracleError::SizeLimit { slot: Slot::Action, len: 7 })
        );
    }
}
