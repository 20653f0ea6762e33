//! Analysis of team problem-solving discussions.
//!
//! A transcript of numbered utterances goes through these stages:
//!
//! * slotted meaning structures are extracted and matched ([`semantics`]);
//! * each utterance gets an act, a solving role and a direction ([`classification`]);
//! * utterances are linked back to what they build on ([`trace`]);
//! * every member's mental images are updated ([`images`]);
//! * the team is diagnosed ([`diagnostics`]).
//!
//! [`pipeline::analyze`] runs all of it.

pub mod classification;
pub mod config;
pub mod diagnostics;
pub mod fixtures;
pub mod images;
pub mod lexicon;
pub mod matching;
pub mod pipeline;
pub mod semantics;
pub mod trace;
pub mod transcript;

pub use classification::{Classification, Direction, DiscourseAct, SolvingRole};
pub use config::{Config, ConfigError, Thresholds};
pub use diagnostics::{DiagnosticsReport, FlagKind, InefficiencyFlag, Metrics, Scenario, ScenarioKind};
pub use images::{ImageKind, MemberState, MentalImage, Mu, RmdcpDirection};
pub use lexicon::{Lexicons, SynonymLexicon};
pub use pipeline::{analyze, evaluate, Analysis, EvalReport};
pub use semantics::{match_structures, MatchResult, Score, SemanticStructure, Slot};
pub use trace::{Certainty, LinkKind, TraceGraph, TraceLink};
pub use transcript::{decode_transcript, parse_transcript, validate_transcript, Transcript, TranscriptError, Utterance};
