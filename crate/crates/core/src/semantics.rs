//! Slotted meaning of an utterance and the matching relation between two of them.
//!
//! A [`SemanticStructure`] keeps the verbs, their objects, identity nouns,
//! goals, outputs and noun properties of one utterance. Any slot may be
//! missing. Two structures are related by a maximum same-slot matching under
//! a synonym relation; the relatedness score is the Dice coefficient of the
//! matched term count.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::lexicon::{tokenize, ExtractionLexicon, LemmaTable, OperationEquivalenceTable, SynonymLexicon};
use crate::matching::lexicographic_max_matching;
use crate::transcript::Utterance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Action,
    Who,
    What,
    Goal,
    Output,
    Properties,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::Action, Slot::Who, Slot::What, Slot::Goal, Slot::Output, Slot::Properties];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Action => "action",
            Slot::Who => "who",
            Slot::What => "what",
            Slot::Goal => "goal",
            Slot::Output => "output",
            Slot::Properties => "properties",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.name() == s)
            .ok_or_else(|| format!("unknown slot {s:?}"))
    }
}

/// Lowercase, trimmed, internal whitespace joined with hyphens.
pub fn normalize_term(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("-")
}

/// Property entries are flattened to `noun:property` terms.
pub fn property_term(noun: &str, property: &str) -> String {
    format!("{noun}:{property}")
}

fn split_property(term: &str) -> (&str, &str) {
    term.split_once(':').unwrap_or((term, ""))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticStructure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub action: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub who: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub what: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub output: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, Vec<String>>,
}

impl SemanticStructure {
    pub fn slot(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Action => &self.action,
            Slot::Who => &self.who,
            Slot::What => &self.what,
            Slot::Goal => &self.goal,
            Slot::Output => &self.output,
            Slot::Properties => &[],
        }
    }

    fn slot_mut(&mut self, slot: Slot) -> &mut Vec<String> {
        match slot {
            Slot::Action => &mut self.action,
            Slot::Who => &mut self.who,
            Slot::What => &mut self.what,
            Slot::Goal => &mut self.goal,
            Slot::Output => &mut self.output,
            Slot::Properties => unreachable!("properties are keyed by noun"),
        }
    }

    /// Terms of one slot; properties come out as `noun:property`.
    pub fn slot_terms(&self, slot: Slot) -> Vec<String> {
        match slot {
            Slot::Properties => self
                .properties
                .iter()
                .flat_map(|(noun, props)| props.iter().map(move |p| property_term(noun, p)))
                .collect(),
            other => self.slot(other).to_vec(),
        }
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (Slot, String)> + '_ {
        Slot::ALL
            .into_iter()
            .flat_map(move |slot| self.slot_terms(slot).into_iter().map(move |t| (slot, t)))
    }

    pub fn term_count(&self) -> usize {
        Slot::ALL.iter().map(|&s| self.slot_terms(s).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.term_count() == 0
    }

    /// Adds a term to a slot; `noun:property` for the properties slot.
    pub fn insert(&mut self, slot: Slot, term: &str) {
        match slot {
            Slot::Properties => {
                let (noun, prop) = split_property(term);
                self.properties.entry(noun.to_string()).or_default().push(prop.to_string());
            }
            other => self.slot_mut(other).push(term.to_string()),
        }
    }

    /// Canonical form: every term normalized and lemmatized, slots sorted and
    /// deduplicated, nouns without properties dropped.
    pub fn normalized(&self, lemmas: &LemmaTable) -> SemanticStructure {
        let norm = |t: &str| lemmas.lemma(&normalize_term(t)).to_string();
        let mut out = SemanticStructure::default();
        for slot in [Slot::Action, Slot::Who, Slot::What, Slot::Goal, Slot::Output] {
            let mut terms: Vec<String> = self.slot(slot).iter().map(|t| norm(t)).filter(|t| !t.is_empty()).collect();
            terms.sort();
            terms.dedup();
            *out.slot_mut(slot) = terms;
        }
        for (noun, props) in &self.properties {
            let noun = norm(noun);
            if noun.is_empty() {
                continue;
            }
            let entry = out.properties.entry(noun).or_default();
            entry.extend(props.iter().map(|p| norm(p)).filter(|p| !p.is_empty()));
        }
        for props in out.properties.values_mut() {
            props.sort();
            props.dedup();
        }
        out.properties.retain(|_, props| !props.is_empty());
        out
    }
}

/// Exact rational score `numerator / denominator` in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    numerator: u32,
    denominator: u32,
}

impl Score {
    pub const ONE: Score = Score { numerator: 1, denominator: 1 };
    pub const ZERO: Score = Score { numerator: 0, denominator: 1 };

    /// Panics if the ratio is outside `[0, 1]` or the denominator is zero.
    pub fn new(numerator: u32, denominator: u32) -> Self {
        assert!(denominator > 0 && numerator <= denominator, "score {numerator}/{denominator} out of range");
        Score { numerator, denominator }
    }

    pub fn numerator(self) -> u32 {
        self.numerator
    }

    pub fn denominator(self) -> u32 {
        self.denominator
    }

    pub fn value(self) -> f64 {
        f64::from(self.numerator) / f64::from(self.denominator)
    }

    pub fn is_one(self) -> bool {
        self.numerator == self.denominator
    }

    /// `self >= threshold` with a small absolute slack for decimal thresholds.
    pub fn at_least(self, threshold: f64) -> bool {
        self.value() >= threshold - 1e-9
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        (u64::from(self.numerator) * u64::from(other.denominator))
            .cmp(&(u64::from(other.numerator) * u64::from(self.denominator)))
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MatchedPair(pub Slot, pub String, pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SlotTerm(pub Slot, pub String);

/// A pair matched across different slots (cross-slot mode only).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CrossPair(pub SlotTerm, pub SlotTerm);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub matched: Vec<MatchedPair>,
    pub unmatched_a: Vec<SlotTerm>,
    pub unmatched_b: Vec<SlotTerm>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cross: Vec<CrossPair>,
    pub score: Score,
}

impl MatchResult {
    pub fn difference_is_empty(&self) -> bool {
        self.unmatched_a.is_empty() && self.unmatched_b.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchOptions {
    /// Also pair leftover terms across slots, each such pair weighing one half.
    pub cross_slot: bool,
}

/// Whether two terms of the given slot are related under the synonym relation.
pub fn terms_match(slot: Slot, a: &str, b: &str, syn: &SynonymLexicon) -> bool {
    if slot == Slot::Properties {
        let (na, pa) = split_property(a);
        let (nb, pb) = split_property(b);
        syn.are_synonyms(na, nb) && syn.are_synonyms(pa, pb)
    } else {
        syn.are_synonyms(a, b)
    }
}

/// Same-slot maximum matching between two normalized structures.
pub fn match_structures(a: &SemanticStructure, b: &SemanticStructure, syn: &SynonymLexicon) -> MatchResult {
    match_structures_with(a, b, syn, MatchOptions::default())
}

pub fn match_structures_with(
    a: &SemanticStructure,
    b: &SemanticStructure,
    syn: &SynonymLexicon,
    options: MatchOptions,
) -> MatchResult {
    let mut matched = Vec::new();
    let mut left_a: Vec<SlotTerm> = Vec::new();
    let mut left_b: Vec<SlotTerm> = Vec::new();
    let mut total = 0usize;

    for slot in Slot::ALL {
        let mut ta = a.slot_terms(slot);
        let mut tb = b.slot_terms(slot);
        ta.sort();
        ta.dedup();
        tb.sort();
        tb.dedup();
        total += ta.len() + tb.len();
        let pairs = lexicographic_max_matching(&ta, &tb, |i, j| terms_match(slot, &ta[i], &tb[j], syn));
        let mut used_a = vec![false; ta.len()];
        let mut used_b = vec![false; tb.len()];
        for (i, j) in pairs {
            used_a[i] = true;
            used_b[j] = true;
            matched.push(MatchedPair(slot, ta[i].clone(), tb[j].clone()));
        }
        left_a.extend(ta.into_iter().zip(used_a).filter(|(_, u)| !u).map(|(t, _)| SlotTerm(slot, t)));
        left_b.extend(tb.into_iter().zip(used_b).filter(|(_, u)| !u).map(|(t, _)| SlotTerm(slot, t)));
    }

    let mut cross = Vec::new();
    if options.cross_slot && !left_a.is_empty() && !left_b.is_empty() {
        // Property terms only pair with property terms, so they never cross.
        let plain = |t: &SlotTerm| t.0 != Slot::Properties;
        let edge = |i: usize, j: usize| {
            let (x, y) = (&left_a[i], &left_b[j]);
            x.0 != y.0 && plain(x) && plain(y) && syn.are_synonyms(&x.1, &y.1)
        };
        let pairs = lexicographic_max_matching(&left_a, &left_b, edge);
        let mut used_a = vec![false; left_a.len()];
        let mut used_b = vec![false; left_b.len()];
        for (i, j) in pairs {
            used_a[i] = true;
            used_b[j] = true;
            cross.push(CrossPair(left_a[i].clone(), left_b[j].clone()));
        }
        left_a = left_a.into_iter().zip(used_a).filter(|(_, u)| !u).map(|(t, _)| t).collect();
        left_b = left_b.into_iter().zip(used_b).filter(|(_, u)| !u).map(|(t, _)| t).collect();
    }

    let score = if total == 0 {
        Score::ONE
    } else {
        Score::new((2 * matched.len() + cross.len()) as u32, total as u32)
    };
    matched.sort();
    left_a.sort();
    left_b.sort();
    cross.sort();
    MatchResult { matched, unmatched_a: left_a, unmatched_b: left_b, cross, score }
}

/// Gold structure (normalized) when annotated, otherwise lexicon-driven extraction from the text.
pub fn extract_structure(u: &Utterance, lex: &ExtractionLexicon) -> SemanticStructure {
    match u.gold.as_ref().and_then(|g| g.structure.as_ref()) {
        Some(gold) => gold.normalized(lex.lemmas()),
        None => extract_from_text(&u.text, lex),
    }
}

/// Tokenizes the text and maps bigrams (preferred) and single tokens through
/// the extraction lexicon; unknown tokens are dropped.
pub fn extract_from_text(text: &str, lex: &ExtractionLexicon) -> SemanticStructure {
    let lemmas = lex.lemmas();
    let tokens: Vec<String> = tokenize(text);
    let lemmatized: Vec<String> = tokens.iter().map(|t| lemmas.lemma(t).to_string()).collect();
    let mut out = SemanticStructure::default();
    let mut i = 0;
    while i < tokens.len() {
        let hit = [2usize, 1].into_iter().filter(|&n| i + n <= tokens.len()).find_map(|n| {
            lex.lookup(&tokens[i..i + n])
                .or_else(|| lex.lookup(&lemmatized[i..i + n]))
                .map(|hit| (n, hit))
        });
        match hit {
            Some((n, (slot, canonical))) => {
                out.insert(*slot, canonical);
                i += n;
            }
            None => i += 1,
        }
    }
    out.normalized(lemmas)
}

/// Slot-wise union; synonymous terms collapse to their lexicographically
/// smallest present spelling. An empty input yields the empty structure.
pub fn merge_structures<'a, I>(parts: I, syn: &SynonymLexicon) -> SemanticStructure
where
    I: IntoIterator<Item = &'a SemanticStructure>,
{
    let parts: Vec<&SemanticStructure> = parts.into_iter().collect();
    let mut out = SemanticStructure::default();
    for slot in [Slot::Action, Slot::Who, Slot::What, Slot::Goal, Slot::Output] {
        let mut by_class: BTreeMap<&str, &str> = BTreeMap::new();
        for part in &parts {
            for term in part.slot(slot) {
                let rep = syn.representative(term);
                by_class
                    .entry(rep)
                    .and_modify(|kept| {
                        if term.as_str() < *kept {
                            *kept = term
                        }
                    })
                    .or_insert(term);
            }
        }
        let mut terms: Vec<String> = by_class.into_values().map(str::to_string).collect();
        terms.sort();
        *out.slot_mut(slot) = terms;
    }

    let mut nouns: BTreeMap<&str, (&str, BTreeMap<&str, &str>)> = BTreeMap::new();
    for part in &parts {
        for (noun, props) in &part.properties {
            let entry = nouns.entry(syn.representative(noun)).or_insert((noun.as_str(), BTreeMap::new()));
            if noun.as_str() < entry.0 {
                entry.0 = noun;
            }
            for prop in props {
                entry
                    .1
                    .entry(syn.representative(prop))
                    .and_modify(|kept| {
                        if prop.as_str() < *kept {
                            *kept = prop
                        }
                    })
                    .or_insert(prop);
            }
        }
    }
    for (_, (noun, props)) in nouns {
        let mut props: Vec<String> = props.into_values().map(str::to_string).collect();
        props.sort();
        out.properties.insert(noun.to_string(), props);
    }
    out
}

/// True when `b` restates `a`: a perfect match once operational equivalences
/// are admitted as synonyms.
pub fn equivalent_restating(
    a: &SemanticStructure,
    b: &SemanticStructure,
    syn: &SynonymLexicon,
    eqv: &OperationEquivalenceTable,
) -> bool {
    let widened = syn.extended(eqv.pairs().iter().map(|(x, y)| (x.as_str(), y.as_str())));
    match_structures(a, b, &widened).score.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{ExtractionLexicon, LemmaTable};

    fn st(json: &str) -> SemanticStructure {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn normalization_collapses_whitespace_and_case() {
        assert_eq!(normalize_term("  Add   Up "), "add-up");
        assert_eq!(normalize_term("all numbers"), "all-numbers");
        let s = st(r#"{"action":["Sum","find","sum"],"properties":{"Loops":["many"],"x":[]}}"#)
            .normalized(&LemmaTable::default());
        assert_eq!(s.action, vec!["find", "sum"]);
        assert_eq!(s.properties.len(), 1);
        assert_eq!(s.properties["loops"], vec!["many"]);
    }

    #[test]
    fn lemmas_apply_during_normalization() {
        let lemmas = LemmaTable::parse("combinations\tcombine\n").unwrap();
        let s = st(r#"{"action":["Combinations"]}"#).normalized(&lemmas);
        assert_eq!(s.action, vec!["combine"]);
    }

    #[test]
    fn empty_structures_match_vacuously() {
        let e = SemanticStructure::default();
        let r = match_structures(&e, &e, &SynonymLexicon::default());
        assert!(r.score.is_one());
        let s = st(r#"{"action":["go"]}"#);
        let r = match_structures(&e, &s, &SynonymLexicon::default());
        assert_eq!(r.score, Score::ZERO);
        assert_eq!(r.unmatched_b, vec![SlotTerm(Slot::Action, "go".into())]);
    }

    #[test]
    fn same_slot_only_by_default() {
        let a = st(r#"{"action":["count"]}"#);
        let b = st(r#"{"who":["count"]}"#);
        let syn = SynonymLexicon::default();
        assert_eq!(match_structures(&a, &b, &syn).matched.len(), 0);
        let r = match_structures_with(&a, &b, &syn, MatchOptions { cross_slot: true });
        assert_eq!(r.cross.len(), 1);
        assert_eq!(r.score, Score::new(1, 2));
        assert!(r.unmatched_a.is_empty());
    }

    #[test]
    fn property_terms_match_on_noun_and_property() {
        let syn = SynonymLexicon::new([("loops", "iterations")]);
        let a = st(r#"{"properties":{"loops":["many"]}}"#);
        let b = st(r#"{"properties":{"iterations":["many"],"loops":["few"]}}"#);
        let r = match_structures(&a, &b, &syn);
        assert_eq!(r.matched, vec![MatchedPair(Slot::Properties, "loops:many".into(), "iterations:many".into())]);
        assert_eq!(r.unmatched_b, vec![SlotTerm(Slot::Properties, "loops:few".into())]);
    }

    #[test]
    fn extraction_prefers_bigrams() {
        let lex = ExtractionLexicon::parse("add up\taction\tadd-up\nall numbers\twho\tall-numbers\nadd\taction\tplus\n").unwrap();
        let u = Utterance { id: "I1".into(), speaker: "a".into(), order: 1, text: "add up all numbers".into(), gold: None };
        let s = extract_structure(&u, &lex);
        assert_eq!(s, st(r#"{"action":["add-up"],"who":["all-numbers"]}"#));
    }

    #[test]
    fn extraction_with_empty_lexicon_is_empty() {
        let u = Utterance { id: "I1".into(), speaker: "a".into(), order: 1, text: "hello world".into(), gold: None };
        assert!(extract_structure(&u, &ExtractionLexicon::default()).is_empty());
    }

    #[test]
    fn gold_structure_takes_precedence() {
        let gold = st(r#"{"action":["find","sum","compare"],"output":["larger"]}"#);
        let u = Utterance {
            id: "I1".into(),
            speaker: "a".into(),
            order: 1,
            text: "add up all numbers".into(),
            gold: Some(crate::transcript::GoldAnnotation { structure: Some(gold.clone()), ..Default::default() }),
        };
        let lex = ExtractionLexicon::parse("add up\taction\tadd-up\n").unwrap();
        assert_eq!(extract_structure(&u, &lex), gold.normalized(&LemmaTable::default()));
    }

    #[test]
    fn merge_keeps_smallest_synonym_spelling() {
        let syn = SynonymLexicon::new([("sum", "add-up")]);
        let a = st(r#"{"action":["sum"],"properties":{"loops":["many"]}}"#);
        let b = st(r#"{"action":["add-up","check"],"properties":{"loops":["nested"]}}"#);
        let m = merge_structures([&a, &b], &syn);
        assert_eq!(m.action, vec!["add-up", "check"]);
        assert_eq!(m.properties["loops"], vec!["many", "nested"]);
        assert_eq!(merge_structures([&a], &syn), a);
    }

    #[test]
    fn restating_admits_operation_equivalences() {
        let syn = SynonymLexicon::default();
        let eqv = OperationEquivalenceTable::new([("minus-one", "shift-left")]);
        let a = st(r#"{"action":["minus-one"],"who":["length"]}"#);
        let b = st(r#"{"action":["shift-left"],"who":["length"]}"#);
        assert!(equivalent_restating(&a, &b, &syn, &eqv));
        assert!(!equivalent_restating(&a, &b, &syn, &OperationEquivalenceTable::default()));
        assert!(equivalent_restating(&a, &a, &syn, &OperationEquivalenceTable::default()));
    }

    #[test]
    fn score_ordering_is_exact() {
        assert!(Score::new(1, 3) < Score::new(34, 100));
        assert_eq!(Score::new(2, 4), Score::new(1, 2));
        assert!(Score::new(1, 4).at_least(0.25));
        assert!(!Score::new(1, 3).at_least(0.34));
    }
}
