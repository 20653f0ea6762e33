//! Line-oriented lexicon files.
//!
//! Every file is UTF-8 text with tab-separated columns; `#` starts a comment
//! and blank lines are ignored.
//!
//! | file | columns |
//! |------|---------|
//! | synonyms | `termA <tab> termB` |
//! | extraction | `surface phrase <tab> slot <tab> canonical` |
//! | equivalences | `actionA <tab> actionB` |
//! | lemmas | `surface <tab> lemma` |
//! | cues | `category <tab> phrase` |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::semantics::{normalize_term, Slot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Non-comment, non-blank lines with their 1-based line numbers, split on tabs.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        if line.trim().is_empty() {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn syntax(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Syntax { file: file.to_string(), line, message: message.into() }
}

fn two_columns<'a>(file: &str, line: usize, cols: &[&'a str]) -> Result<(&'a str, &'a str), LexiconError> {
    match cols {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(syntax(file, line, format!("expected 2 non-empty tab-separated columns, found {}", cols.len()))),
    }
}

/// Symmetric, transitive synonym relation over normalized terms.
///
/// Classes are computed once at construction; every term is a synonym of
/// itself whether or not it appears in any pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    pairs: BTreeSet<(String, String)>,
    class_of: HashMap<String, String>,
}

impl SynonymLexicon {
    pub fn new<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            let (a, b) = (normalize_term(a.as_ref()), normalize_term(b.as_ref()));
            if a.is_empty() || b.is_empty() || a == b {
                continue;
            }
            set.insert(if a <= b { (a, b) } else { (b, a) });
        }
        let class_of = closure(&set);
        SynonymLexicon { pairs: set, class_of }
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut pairs = Vec::new();
        for (line, cols) in records(text) {
            let (a, b) = two_columns("synonyms", line, &cols)?;
            pairs.push((a.to_string(), b.to_string()));
        }
        Ok(Self::new(pairs))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Lexicographically smallest member of the term's class.
    pub fn representative<'a>(&'a self, term: &'a str) -> &'a str {
        self.class_of.get(term).map(String::as_str).unwrap_or(term)
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        a == b || self.representative(a) == self.representative(b)
    }

    /// New lexicon containing this relation plus `extra` pairs.
    pub fn extended<I, A, B>(&self, extra: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mine = self.pairs.iter().map(|(a, b)| (a.clone(), b.clone()));
        let theirs = extra
            .into_iter()
            .map(|(a, b)| (a.as_ref().to_string(), b.as_ref().to_string()));
        Self::new(mine.chain(theirs).collect::<Vec<_>>())
    }
}

fn closure(pairs: &BTreeSet<(String, String)>) -> HashMap<String, String> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (a, b) in pairs {
        let n = index.len();
        index.entry(a).or_insert(n);
        let n = index.len();
        index.entry(b).or_insert(n);
    }
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, index[a.as_str()]), find(&mut parent, index[b.as_str()]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut smallest: HashMap<usize, &str> = HashMap::new();
    // BTreeMap iteration is sorted, so the first term seen per root is the smallest.
    for (&term, &i) in &index {
        let root = find(&mut parent, i);
        smallest.entry(root).or_insert(term);
    }
    index
        .iter()
        .map(|(&term, &i)| {
            let root = find(&mut parent, i);
            (term.to_string(), smallest[&root].to_string())
        })
        .collect()
}

/// Action pairs declared operationally equivalent (e.g. `minus-one` and `shift-left`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperationEquivalenceTable {
    pairs: Vec<(String, String)>,
}

impl OperationEquivalenceTable {
    pub fn new<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(a, b)| (normalize_term(a.as_ref()), normalize_term(b.as_ref())))
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .collect();
        pairs.sort();
        pairs.dedup();
        OperationEquivalenceTable { pairs }
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut pairs = Vec::new();
        for (line, cols) in records(text) {
            let (a, b) = two_columns("equivalences", line, &cols)?;
            pairs.push((a.to_string(), b.to_string()));
        }
        Ok(Self::new(pairs))
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }
}

/// Surface word to lemma lookup used by term normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaTable {
    map: HashMap<String, String>,
}

impl LemmaTable {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        for (line, cols) in records(text) {
            let (surface, lemma) = two_columns("lemmas", line, &cols)?;
            map.insert(normalize_term(surface), normalize_term(lemma));
        }
        Ok(LemmaTable { map })
    }

    pub fn lemma<'a>(&'a self, term: &'a str) -> &'a str {
        self.map.get(term).map(String::as_str).unwrap_or(term)
    }
}

/// Maps one- or two-token surface phrases to a slot and canonical term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractionLexicon {
    entries: HashMap<Vec<String>, (Slot, String)>,
    lemmas: LemmaTable,
}

impl ExtractionLexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = HashMap::new();
        for (line, cols) in records(text) {
            let [surface, slot, canonical] = cols.as_slice() else {
                return Err(syntax("extraction", line, format!("expected 3 tab-separated columns, found {}", cols.len())));
            };
            let key = tokenize(surface);
            if key.is_empty() || key.len() > 2 {
                return Err(syntax("extraction", line, "surface phrase must be one or two words"));
            }
            let slot: Slot = slot
                .parse()
                .map_err(|_| syntax("extraction", line, format!("unknown slot {slot:?}")))?;
            let canonical = normalize_term(canonical);
            if canonical.is_empty() {
                return Err(syntax("extraction", line, "empty canonical term"));
            }
            if slot == Slot::Properties && !canonical.contains(':') {
                return Err(syntax("extraction", line, "property entries are written noun:property"));
            }
            entries.insert(key, (slot, canonical));
        }
        Ok(ExtractionLexicon { entries, lemmas: LemmaTable::default() })
    }

    pub fn with_lemmas(mut self, lemmas: LemmaTable) -> Self {
        self.lemmas = lemmas;
        self
    }

    pub fn lemmas(&self) -> &LemmaTable {
        &self.lemmas
    }

    pub fn lookup(&self, tokens: &[String]) -> Option<&(Slot, String)> {
        self.entries.get(tokens)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Categories of cue phrases consulted by the rule-based classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CueKind {
    Interrogative,
    Acknowledgment,
    AnalogyTerm,
    AnalogyReference,
    Behavior,
    Execution,
    Causal,
    Modal,
    Uncertainty,
    Code,
    Correction,
}

impl CueKind {
    pub const ALL: [CueKind; 11] = [
        CueKind::Interrogative,
        CueKind::Acknowledgment,
        CueKind::AnalogyTerm,
        CueKind::AnalogyReference,
        CueKind::Behavior,
        CueKind::Execution,
        CueKind::Causal,
        CueKind::Modal,
        CueKind::Uncertainty,
        CueKind::Code,
        CueKind::Correction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CueKind::Interrogative => "interrogative",
            CueKind::Acknowledgment => "acknowledgment",
            CueKind::AnalogyTerm => "analogy_term",
            CueKind::AnalogyReference => "analogy_reference",
            CueKind::Behavior => "behavior",
            CueKind::Execution => "execution",
            CueKind::Causal => "causal",
            CueKind::Modal => "modal",
            CueKind::Uncertainty => "uncertainty",
            CueKind::Code => "code",
            CueKind::Correction => "correction",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CueLexicon {
    cues: BTreeMap<CueKind, Vec<String>>,
}

impl CueLexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut cues: BTreeMap<CueKind, Vec<String>> = BTreeMap::new();
        for (line, cols) in records(text) {
            let (kind, phrase) = two_columns("cues", line, &cols)?;
            let kind = CueKind::from_name(kind)
                .ok_or_else(|| syntax("cues", line, format!("unknown cue category {kind:?}")))?;
            cues.entry(kind).or_default().push(phrase.to_lowercase());
        }
        Ok(CueLexicon { cues })
    }

    pub fn phrases(&self, kind: CueKind) -> &[String] {
        self.cues.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True when the text contains any phrase of the category.
    pub fn mentions(&self, kind: CueKind, text: &str) -> bool {
        let lower = text.to_lowercase();
        let tokens = tokenize(&lower);
        self.phrases(kind).iter().any(|p| phrase_in(p, &lower, &tokens))
    }

    /// True when the normalized term is listed in the category.
    pub fn lists_term(&self, kind: CueKind, term: &str) -> bool {
        self.phrases(kind).iter().any(|p| normalize_term(p) == term)
    }
}

fn phrase_in(phrase: &str, lower_text: &str, tokens: &[String]) -> bool {
    let wordy = phrase
        .chars()
        .all(|c| c.is_alphanumeric() || c == ' ' || c == '-' || c == '\'');
    if !wordy {
        return lower_text.contains(phrase);
    }
    let needle = tokenize(phrase);
    !needle.is_empty() && tokens.windows(needle.len()).any(|w| w == needle.as_slice())
}

/// Lowercase word tokens. Word characters are alphanumerics plus `-`, `+`, `_`
/// and an apostrophe between letters.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let inner_apostrophe = (c == '\'' || c == '\u{2019}')
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || c == '-' || c == '+' || c == '_' || inner_apostrophe {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|t| t.chars().any(|c| c.is_alphanumeric() || c == '+'));
    out
}

pub const SYNONYMS: &str = include_str!("../../../fixtures/lexicon/synonyms.tsv");
pub const EXTRACTION: &str = include_str!("../../../fixtures/lexicon/extraction.tsv");
pub const EQUIVALENCES: &str = include_str!("../../../fixtures/lexicon/equivalences.tsv");
pub const LEMMAS: &str = include_str!("../../../fixtures/lexicon/lemmas.tsv");
pub const CUES: &str = include_str!("../../../fixtures/lexicon/cues.tsv");

/// Every lexicon the pipeline consults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub synonyms: SynonymLexicon,
    pub extraction: ExtractionLexicon,
    pub equivalences: OperationEquivalenceTable,
    pub cues: CueLexicon,
}

impl Lexicons {
    /// The lexicons compiled into the crate.
    pub fn embedded() -> Self {
        Self::from_texts(SYNONYMS, EXTRACTION, EQUIVALENCES, LEMMAS, CUES)
            .expect("embedded lexicons are well-formed")
    }

    pub fn from_texts(
        synonyms: &str,
        extraction: &str,
        equivalences: &str,
        lemmas: &str,
        cues: &str,
    ) -> Result<Self, LexiconError> {
        Ok(Lexicons {
            synonyms: SynonymLexicon::parse(synonyms)?,
            extraction: ExtractionLexicon::parse(extraction)?.with_lemmas(LemmaTable::parse(lemmas)?),
            equivalences: OperationEquivalenceTable::parse(equivalences)?,
            cues: CueLexicon::parse(cues)?,
        })
    }

    /// Loads `synonyms.tsv`, `extraction.tsv`, `equivalences.tsv`, `lemmas.tsv`
    /// and `cues.tsv` from a directory; absent files fall back to the embedded ones.
    pub fn load_dir(dir: &Path) -> Result<Self, LexiconError> {
        if !dir.is_dir() {
            return Err(LexiconError::Io {
                path: dir.display().to_string(),
                message: "not a directory".into(),
            });
        }
        let read = |name: &str, fallback: &'static str| -> Result<String, LexiconError> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(fallback.to_string());
            }
            std::fs::read_to_string(&path).map_err(|e| LexiconError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        Self::from_texts(
            &read("synonyms.tsv", SYNONYMS)?,
            &read("extraction.tsv", EXTRACTION)?,
            &read("equivalences.tsv", EQUIVALENCES)?,
            &read("lemmas.tsv", LEMMAS)?,
            &read("cues.tsv", CUES)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synonym_closure_is_transitive_and_reflexive() {
        let lex = SynonymLexicon::new([("sum", "add-up"), ("add-up", "total")]);
        assert!(lex.are_synonyms("sum", "total"));
        assert!(lex.are_synonyms("total", "sum"));
        assert!(lex.are_synonyms("anything", "anything"));
        assert!(!lex.are_synonyms("sum", "larger"));
        assert_eq!(lex.representative("total"), "add-up");
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# header\n\nsum\tadd up   # trailing\n";
        let lex = SynonymLexicon::parse(text).unwrap();
        assert_eq!(lex.len(), 1);
        assert!(lex.are_synonyms("sum", "add-up"));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = SynonymLexicon::parse("a\tb\nlonely\n").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 2, .. }), "{err}");
        let err = ExtractionLexicon::parse("add up\tverb\tadd-up\n").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 1, .. }));
        let err = ExtractionLexicon::parse("one two three\taction\tx\n").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 1, .. }));
        let err = CueLexicon::parse("mystery\tfoo\n").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 1, .. }));
    }

    #[test]
    fn cue_matching_uses_token_boundaries() {
        let cues = CueLexicon::parse("modal\tneed to\ncode\t++\nuncertainty\ttry\n").unwrap();
        assert!(cues.mentions(CueKind::Modal, "We need to reset it"));
        assert!(!cues.mentions(CueKind::Modal, "it needs a counter"));
        assert!(cues.mentions(CueKind::Code, "then count++ for batch one"));
        assert!(!cues.mentions(CueKind::Uncertainty, "the entry point"));
    }

    #[test]
    fn tokenizer_keeps_hyphens_and_increments() {
        assert_eq!(tokenize("Sub-arrays, count++ don't!"), vec!["sub-arrays", "count++", "don't"]);
        assert_eq!(tokenize("  -- ... "), Vec::<String>::new());
    }

    #[test]
    fn embedded_lexicons_load() {
        let lex = Lexicons::embedded();
        assert!(lex.synonyms.are_synonyms("sum", "add-up"));
        assert!(!lex.extraction.is_empty());
        assert!(!lex.cues.phrases(CueKind::Interrogative).is_empty());
    }
}
