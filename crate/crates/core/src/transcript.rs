//! Transcript interchange format.
//!
//! A transcript is a JSON document holding the problem, the team and the
//! ordered utterances of one discussion, optionally with gold annotations.
//! Decoding is strict: unknown keys are rejected and every structural
//! invariant is checked before a [`Transcript`] is handed out.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classification::{DiscourseAct, SolvingRole};
use crate::semantics::SemanticStructure;
use crate::trace::{Certainty, LinkKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub problem: ProblemMeta,
    pub team: TeamMeta,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemMeta {
    pub id: String,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tests: Option<Vec<ProblemTest>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemTest {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamMeta {
    pub members: Vec<String>,
    pub initial_state: InitialState,
}

/// Starting condition of the team before the discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Complete,
    Partial,
    None,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utterance {
    pub id: String,
    pub speaker: String,
    pub order: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<GoldAnnotation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<SemanticStructure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<SolvingRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<DiscourseAct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<GoldLink>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldLink {
    pub to: String,
    pub kind: LinkKind,
    pub certainty: Certainty,
}

/// Where a problem was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Location {
    Utterance(String),
    Offset(usize),
    Field(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Utterance(id) => write!(f, "utterance {id}"),
            Location::Offset(at) => write!(f, "byte {at}"),
            Location::Field(name) => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("schema error at {location}: {message}")]
    Schema { location: Location, message: String },
    #[error("order error at {location}: {message}")]
    Order { location: Location, message: String },
    #[error("reference error at {location}: {message}")]
    Ref { location: Location, message: String },
    #[error("empty transcript at {location}: {message}")]
    Empty { location: Location, message: String },
}

impl TranscriptError {
    pub fn location(&self) -> &Location {
        match self {
            TranscriptError::Schema { location, .. }
            | TranscriptError::Order { location, .. }
            | TranscriptError::Ref { location, .. }
            | TranscriptError::Empty { location, .. } => location,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

/// Category of a diagnostic; error-level categories map onto [`TranscriptError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    Schema,
    Order,
    Ref,
    Empty,
    MissingStructure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub code: DiagnosticCode,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    fn error(code: DiagnosticCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic { level: Level::Error, code, location, message: message.into() }
    }

    fn into_error(self) -> TranscriptError {
        let Diagnostic { code, location, message, .. } = self;
        match code {
            DiagnosticCode::Order => TranscriptError::Order { location, message },
            DiagnosticCode::Ref => TranscriptError::Ref { location, message },
            DiagnosticCode::Empty => TranscriptError::Empty { location, message },
            DiagnosticCode::Schema | DiagnosticCode::MissingStructure => {
                TranscriptError::Schema { location, message }
            }
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Error => "error",
            Level::Warning => "warning",
        };
        write!(f, "{level}: {}: {}", self.location, self.message)
    }
}

/// Decodes and validates a transcript. Warnings do not fail the parse.
pub fn parse_transcript(bytes: &[u8]) -> Result<Transcript, TranscriptError> {
    let transcript = decode_transcript(bytes)?;
    match validate_transcript(&transcript)
        .into_iter()
        .find(|d| d.level == Level::Error)
    {
        Some(diag) => Err(diag.into_error()),
        None => Ok(transcript),
    }
}

/// Schema-level decoding only; invariants are left to [`validate_transcript`].
pub fn decode_transcript(bytes: &[u8]) -> Result<Transcript, TranscriptError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TranscriptError::Schema {
        location: Location::Offset(e.valid_up_to()),
        message: "input is not valid UTF-8".to_string(),
    })?;
    serde_json::from_str(text).map_err(|e| TranscriptError::Schema {
        location: Location::Offset(byte_offset(text, e.line(), e.column())),
        message: e.to_string(),
    })
}

/// serde_json reports 1-based lines and columns; column 0 means "before the line".
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Canonical serialization: struct-declared key order, absent options omitted,
/// two-space indentation and a trailing newline.
pub fn serialize_transcript(t: &Transcript) -> String {
    let mut out = serde_json::to_string_pretty(t).expect("transcript is always serializable");
    out.push('\n');
    out
}

pub fn is_valid_utterance_id(id: &str) -> bool {
    let mut chars = id.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    let rest = chars.as_str();
    !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
}

/// Checks every transcript invariant. Returns an empty list iff the transcript
/// is valid and every utterance carries a gold structure.
pub fn validate_transcript(t: &Transcript) -> Vec<Diagnostic> {
    use DiagnosticCode as C;
    let mut out = Vec::new();

    if t.problem.id.trim().is_empty() {
        out.push(Diagnostic::error(C::Schema, Location::Field("problem.id".into()), "problem id is empty"));
    }
    if t.problem.statement.trim().is_empty() {
        out.push(Diagnostic::error(
            C::Schema,
            Location::Field("problem.statement".into()),
            "problem statement is empty",
        ));
    }
    if t.team.members.is_empty() {
        out.push(Diagnostic::error(C::Empty, Location::Field("team.members".into()), "team has no members"));
    }
    let mut members = HashSet::new();
    for m in &t.team.members {
        if m.trim().is_empty() {
            out.push(Diagnostic::error(C::Schema, Location::Field("team.members".into()), "empty member id"));
        } else if !members.insert(m.as_str()) {
            out.push(Diagnostic::error(
                C::Schema,
                Location::Field("team.members".into()),
                format!("duplicate member id {m:?}"),
            ));
        }
    }
    if t.utterances.is_empty() {
        out.push(Diagnostic::error(C::Empty, Location::Field("utterances".into()), "transcript has no utterances"));
    }

    let mut order_of: HashMap<&str, i64> = HashMap::new();
    let mut seen_ids = HashSet::new();
    let mut prev_order: Option<(i64, &str)> = None;
    for u in &t.utterances {
        let here = || Location::Utterance(u.id.clone());
        if !is_valid_utterance_id(&u.id) {
            out.push(Diagnostic::error(
                C::Schema,
                here(),
                format!("utterance id {:?} is not a letter followed by digits", u.id),
            ));
        }
        if !seen_ids.insert(u.id.as_str()) {
            out.push(Diagnostic::error(C::Schema, here(), format!("duplicate utterance id {}", u.id)));
        }
        if u.order < 1 {
            out.push(Diagnostic::error(C::Order, here(), format!("order {} is not positive", u.order)));
        }
        if let Some((prev, prev_id)) = prev_order {
            if u.order <= prev {
                out.push(Diagnostic::error(
                    C::Order,
                    here(),
                    format!("order {} does not increase past {} ({prev_id})", u.order, prev),
                ));
            }
        }
        prev_order = Some((u.order, u.id.as_str()));
        if u.text.trim().is_empty() {
            out.push(Diagnostic::error(C::Schema, here(), "utterance text is empty"));
        }
        if !members.contains(u.speaker.as_str()) {
            out.push(Diagnostic::error(
                C::Ref,
                here(),
                format!("speaker {:?} is not a team member", u.speaker),
            ));
        }
        order_of.entry(u.id.as_str()).or_insert(u.order);
    }

    // Links are checked after all ids are known so that forward links are
    // reported as such rather than as unknown targets.
    for u in &t.utterances {
        let here = || Location::Utterance(u.id.clone());
        let Some(gold) = &u.gold else { continue };
        if let Some(links) = &gold.links {
            let mut targets = HashSet::new();
            for link in links {
                match order_of.get(link.to.as_str()) {
                    None => out.push(Diagnostic::error(
                        C::Ref,
                        here(),
                        format!("link target {} does not exist", link.to),
                    )),
                    Some(&target_order) if target_order >= u.order => out.push(Diagnostic::error(
                        C::Ref,
                        here(),
                        format!("link target {} is not earlier than {}", link.to, u.id),
                    )),
                    Some(_) => {}
                }
                if !targets.insert(link.to.as_str()) {
                    out.push(Diagnostic::error(C::Schema, here(), format!("duplicate link target {}", link.to)));
                }
            }
            let ambiguous = links.iter().filter(|l| l.certainty == Certainty::Ambiguous).count();
            if links.len() >= 2 && ambiguous != links.len() {
                out.push(Diagnostic::error(
                    C::Schema,
                    here(),
                    "an utterance with several links must mark all of them ambiguous",
                ));
            }
        }
        if let Some(structure) = &gold.structure {
            for (slot, term) in structure.iter_terms() {
                if term.trim().is_empty() {
                    out.push(Diagnostic::error(
                        C::Schema,
                        here(),
                        format!("empty term in gold {slot} slot"),
                    ));
                }
            }
        }
    }

    for u in &t.utterances {
        if u.gold.as_ref().and_then(|g| g.structure.as_ref()).is_none() {
            out.push(Diagnostic {
                level: Level::Warning,
                code: C::MissingStructure,
                location: Location::Utterance(u.id.clone()),
                message: "no gold semantic structure; heuristic extraction will be used".into(),
            });
        }
    }
    out
}

impl Transcript {
    pub fn utterance(&self, id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.utterances.iter().position(|u| u.id == id)
    }

    /// Number of utterances per member, including silent members.
    pub fn utterance_counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> =
            self.team.members.iter().map(|m| (m.clone(), 0)).collect();
        for u in &self.utterances {
            *counts.entry(u.speaker.clone()).or_default() += 1;
        }
        counts
    }

    /// Copy with every gold role, act and link removed. Gold structures stay:
    /// they are the meaning annotation the classifier consumes.
    pub fn without_gold_labels(&self) -> Transcript {
        let mut t = self.clone();
        for u in &mut t.utterances {
            if let Some(g) = &mut u.gold {
                g.role = None;
                g.act = None;
                g.links = None;
            }
        }
        t
    }

    /// Copy whose team initial state is `unknown`.
    pub fn without_metadata(&self) -> Transcript {
        let mut t = self.clone();
        t.team.initial_state = InitialState::Unknown;
        t
    }
}
