//! Per-member mental images and the recall/match/difference/combine/predict
//! operator relating two of them.
//!
//! Images are append-only fragment stores. Every utterance that carries
//! content lands in the images chosen by its role: as a `stated` fragment for
//! the speaker and as an identical `heard` fragment for everyone else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classification::{Classification, DiscourseAct, SolvingRole};
use crate::lexicon::{CueKind, CueLexicon, SynonymLexicon};
use crate::semantics::{match_structures, merge_structures, Score, SemanticStructure, Slot, SlotTerm};
use crate::transcript::Utterance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageKind {
    ProblemDescription,
    NeededChangesInProblemDescription,
    DesiredSolution,
    ExistingSolution,
    ExpectedBehavior,
    ObservedBehavior,
    CausalityOfDifferences,
    NeededChanges,
}

impl ImageKind {
    pub const ALL: [ImageKind; 8] = [
        ImageKind::ProblemDescription,
        ImageKind::NeededChangesInProblemDescription,
        ImageKind::DesiredSolution,
        ImageKind::ExistingSolution,
        ImageKind::ExpectedBehavior,
        ImageKind::ObservedBehavior,
        ImageKind::CausalityOfDifferences,
        ImageKind::NeededChanges,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImageKind::ProblemDescription => "problem_description",
            ImageKind::NeededChangesInProblemDescription => "needed_changes_in_problem_description",
            ImageKind::DesiredSolution => "desired_solution",
            ImageKind::ExistingSolution => "existing_solution",
            ImageKind::ExpectedBehavior => "expected_behavior",
            ImageKind::ObservedBehavior => "observed_behavior",
            ImageKind::CausalityOfDifferences => "causality_of_differences",
            ImageKind::NeededChanges => "needed_changes",
        }
    }

    /// 0 for problem-level images, 1 for intended solutions and behavior, 2 for
    /// artifacts and what was observed of them.
    fn abstraction_level(self) -> u8 {
        match self {
            ImageKind::ProblemDescription | ImageKind::NeededChangesInProblemDescription => 0,
            ImageKind::DesiredSolution | ImageKind::ExpectedBehavior | ImageKind::NeededChanges => 1,
            ImageKind::ExistingSolution | ImageKind::ObservedBehavior | ImageKind::CausalityOfDifferences => 2,
        }
    }

    fn is_behavior(self) -> bool {
        matches!(self, ImageKind::ExpectedBehavior | ImageKind::ObservedBehavior)
    }
}

impl fmt::Display for ImageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Stated,
    Heard,
    Inferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentConfidence {
    Firm,
    Tentative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fragment {
    pub structure: SemanticStructure,
    pub source: String,
    pub author: String,
    pub provenance: Provenance,
    pub confidence: FragmentConfidence,
    /// Set once a later combining utterance has folded this change in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absorbed_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MentalImage {
    pub kind: ImageKind,
    pub fragments: Vec<Fragment>,
}

impl MentalImage {
    pub fn new(kind: ImageKind) -> Self {
        MentalImage { kind, fragments: Vec::new() }
    }

    /// Appends unless a fragment with the same source and structure exists.
    pub fn push(&mut self, fragment: Fragment) -> bool {
        let duplicate = self
            .fragments
            .iter()
            .any(|f| f.source == fragment.source && f.structure == fragment.structure);
        if !duplicate {
            self.fragments.push(fragment);
        }
        !duplicate
    }

    /// Recall: the image as one merged structure.
    pub fn recall(&self, syn: &SynonymLexicon) -> SemanticStructure {
        merge_structures(self.fragments.iter().map(|f| &f.structure), syn)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberState {
    pub member: String,
    pub images: BTreeMap<ImageKind, MentalImage>,
    pub touched: BTreeSet<ImageKind>,
}

impl MemberState {
    pub fn new(member: &str) -> Self {
        MemberState {
            member: member.to_string(),
            images: ImageKind::ALL.into_iter().map(|k| (k, MentalImage::new(k))).collect(),
            touched: BTreeSet::new(),
        }
    }

    pub fn image(&self, kind: ImageKind) -> &MentalImage {
        &self.images[&kind]
    }

    fn image_mut(&mut self, kind: ImageKind) -> &mut MentalImage {
        self.images.get_mut(&kind).expect("every kind is present")
    }

    pub fn untouched(&self) -> BTreeSet<ImageKind> {
        ImageKind::ALL.into_iter().filter(|k| !self.touched.contains(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu {
    Consistent,
    MissingFragment,
    SurplusProcessing,
    BehaviorMismatch,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Delta {
    /// Terms the combine step adds to the target image.
    pub additions: Vec<SlotTerm>,
    pub removals_a: Vec<SlotTerm>,
    pub removals_b: Vec<SlotTerm>,
    pub mu: Mu,
    pub match_score: Score,
}

impl Delta {
    pub fn difference_is_empty(&self) -> bool {
        self.removals_a.is_empty() && self.removals_b.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmdcpDirection {
    TopDown,
    BottomUp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RmdcpResult {
    pub delta: Delta,
    pub combined: MentalImage,
    pub direction: RmdcpDirection,
}

fn predict(a: ImageKind, b: ImageKind, removals_a: &[SlotTerm], removals_b: &[SlotTerm]) -> Mu {
    if removals_a.is_empty() && removals_b.is_empty() {
        return Mu::Consistent;
    }
    if a.is_behavior() || b.is_behavior() {
        return Mu::BehaviorMismatch;
    }
    let (reference, other) = if b.abstraction_level() < a.abstraction_level() {
        (removals_b, removals_a)
    } else {
        (removals_a, removals_b)
    };
    if !reference.is_empty() {
        Mu::MissingFragment
    } else if other.iter().all(|t| t.0 == Slot::Action) {
        Mu::SurplusProcessing
    } else {
        Mu::Ambiguous
    }
}

/// Relates image `a` to image `b`. The combine step extends `b` with what only
/// `a` holds (top-down) or `a` with what only `b` holds (bottom-up).
pub fn rmdcp(a: &MentalImage, b: &MentalImage, syn: &SynonymLexicon, direction: RmdcpDirection) -> RmdcpResult {
    let m = match_structures(&a.recall(syn), &b.recall(syn), syn);
    let mu = predict(a.kind, b.kind, &m.unmatched_a, &m.unmatched_b);
    let (target, other, additions) = match direction {
        RmdcpDirection::TopDown => (b, a, m.unmatched_a.clone()),
        RmdcpDirection::BottomUp => (a, b, m.unmatched_b.clone()),
    };
    let mut combined = target.clone();
    if let Some(last) = other.fragments.last().filter(|_| !additions.is_empty()) {
        let mut structure = SemanticStructure::default();
        for SlotTerm(slot, term) in &additions {
            structure.insert(*slot, term);
        }
        combined.push(Fragment {
            structure,
            source: last.source.clone(),
            author: last.author.clone(),
            provenance: Provenance::Inferred,
            confidence: FragmentConfidence::Firm,
            absorbed_by: None,
        });
    }
    RmdcpResult {
        delta: Delta { additions, removals_a: m.unmatched_a, removals_b: m.unmatched_b, mu, match_score: m.score },
        combined,
        direction,
    }
}

/// Converged: the desired solution covers the problem and the existing
/// solution realizes the desired one.
pub fn solved(state: &MemberState, syn: &SynonymLexicon) -> bool {
    let problem = state.image(ImageKind::ProblemDescription);
    let desired = state.image(ImageKind::DesiredSolution);
    let existing = state.image(ImageKind::ExistingSolution);
    rmdcp(problem, desired, syn, RmdcpDirection::TopDown).delta.difference_is_empty()
        && rmdcp(desired, existing, syn, RmdcpDirection::TopDown).delta.difference_is_empty()
}

pub fn coverage(state: &MemberState) -> BTreeSet<ImageKind> {
    state.touched.clone()
}

/// A link target of the utterance being applied.
#[derive(Debug, Clone, Copy)]
pub struct LinkedTarget<'a> {
    pub id: &'a str,
    pub role: SolvingRole,
}

/// Images an utterance updates, from its role and cue words.
pub fn image_targets(
    text: &str,
    cls: &Classification,
    targets: &[LinkedTarget<'_>],
    cues: &CueLexicon,
) -> Vec<ImageKind> {
    let mut kinds = Vec::new();
    match cls.role {
        SolvingRole::ProblemUnderstanding | SolvingRole::ProblemExplanation => {
            kinds.push(ImageKind::ProblemDescription);
            if targets.iter().any(|t| t.role.is_problem_talk()) || cues.mentions(CueKind::Correction, text) {
                kinds.push(ImageKind::NeededChangesInProblemDescription);
            }
        }
        SolvingRole::SolutionExplanation
        | SolvingRole::Analogy
        | SolvingRole::Abstracting
        | SolvingRole::Restating
        | SolvingRole::Combining => kinds.push(ImageKind::DesiredSolution),
        SolvingRole::RequiredChange | SolvingRole::MissingFragment | SolvingRole::Hypothesis => {
            kinds.push(ImageKind::NeededChanges)
        }
        SolvingRole::Analysis => {
            if cues.mentions(CueKind::Execution, text) {
                kinds.push(ImageKind::ObservedBehavior);
            } else {
                kinds.push(ImageKind::ExpectedBehavior);
            }
            if cues.mentions(CueKind::Causal, text) {
                kinds.push(ImageKind::CausalityOfDifferences);
            }
        }
        SolvingRole::Comparison => {
            kinds.push(ImageKind::ExpectedBehavior);
            kinds.push(ImageKind::ObservedBehavior);
        }
        SolvingRole::SolutionUnderstanding => {}
    }
    if cues.mentions(CueKind::Code, text) {
        kinds.push(ImageKind::ExistingSolution);
    }
    kinds
}

/// Applies one utterance to every member's state. Returns the images updated.
pub fn apply_utterance(
    states: &mut [MemberState],
    u: &Utterance,
    structure: &SemanticStructure,
    cls: &Classification,
    targets: &[LinkedTarget<'_>],
    cues: &CueLexicon,
) -> Vec<ImageKind> {
    if cls.act == DiscourseAct::Acknowledgment || structure.is_empty() {
        return Vec::new();
    }
    let kinds = image_targets(&u.text, cls, targets, cues);
    let confidence = if cls.role == SolvingRole::Hypothesis {
        FragmentConfidence::Tentative
    } else {
        FragmentConfidence::Firm
    };
    for state in states.iter_mut() {
        let provenance = if state.member == u.speaker { Provenance::Stated } else { Provenance::Heard };
        for &kind in &kinds {
            state.image_mut(kind).push(Fragment {
                structure: structure.clone(),
                source: u.id.clone(),
                author: u.speaker.clone(),
                provenance,
                confidence,
                absorbed_by: None,
            });
            state.touched.insert(kind);
        }
        if cls.role == SolvingRole::Combining {
            for f in &mut state.image_mut(ImageKind::NeededChanges).fragments {
                if f.absorbed_by.is_none() && targets.iter().any(|t| t.id == f.source) {
                    f.absorbed_by = Some(u.id.clone());
                }
            }
        }
    }
    kinds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::{Confidence, Direction};

    fn st(json: &str) -> SemanticStructure {
        serde_json::from_str(json).unwrap()
    }

    fn image(kind: ImageKind, parts: &[&str]) -> MentalImage {
        let mut img = MentalImage::new(kind);
        for (i, p) in parts.iter().enumerate() {
            img.push(Fragment {
                structure: st(p),
                source: format!("I{}", i + 1),
                author: "m1".into(),
                provenance: Provenance::Stated,
                confidence: FragmentConfidence::Firm,
                absorbed_by: None,
            });
        }
        img
    }

    fn cls(role: SolvingRole, act: DiscourseAct) -> Classification {
        Classification { act, role, direction: Direction::None, rule_fired: "test".into(), confidence: Confidence::Rule }
    }

    fn utt(id: &str, speaker: &str, text: &str) -> Utterance {
        Utterance { id: id.into(), speaker: speaker.into(), order: 1, text: text.into(), gold: None }
    }

    #[test]
    fn identical_images_are_consistent() {
        let a = image(ImageKind::DesiredSolution, &[r#"{"action":["sum"],"who":["all"]}"#]);
        let r = rmdcp(&a, &a, &SynonymLexicon::default(), RmdcpDirection::TopDown);
        assert_eq!(r.delta.mu, Mu::Consistent);
        assert!(r.delta.match_score.is_one());
        assert!(r.delta.difference_is_empty());
        assert_eq!(r.combined, a);
    }

    #[test]
    fn empty_images_are_vacuously_consistent() {
        let a = MentalImage::new(ImageKind::ProblemDescription);
        let b = MentalImage::new(ImageKind::DesiredSolution);
        let r = rmdcp(&a, &b, &SynonymLexicon::default(), RmdcpDirection::TopDown);
        assert_eq!(r.delta.mu, Mu::Consistent);
        assert!(r.delta.match_score.is_one());
    }

    #[test]
    fn uncovered_requirement_is_a_missing_fragment() {
        let problem = image(ImageKind::ProblemDescription, &[r#"{"action":["find","track"],"who":["batch"]}"#]);
        let desired = image(ImageKind::DesiredSolution, &[r#"{"action":["find"],"who":["batch"]}"#]);
        let r = rmdcp(&problem, &desired, &SynonymLexicon::default(), RmdcpDirection::TopDown);
        assert_eq!(r.delta.mu, Mu::MissingFragment);
        assert_eq!(r.delta.additions, vec![SlotTerm(Slot::Action, "track".into())]);
        assert_eq!(r.combined.fragments.len(), 2);
        assert_eq!(r.combined.fragments[1].provenance, Provenance::Inferred);
    }

    #[test]
    fn extra_solution_actions_are_surplus_processing() {
        let problem = image(ImageKind::ProblemDescription, &[r#"{"action":["find"]}"#]);
        let desired = image(ImageKind::DesiredSolution, &[r#"{"action":["find","sort"]}"#]);
        let r = rmdcp(&problem, &desired, &SynonymLexicon::default(), RmdcpDirection::TopDown);
        assert_eq!(r.delta.mu, Mu::SurplusProcessing);
        // Top-down combine adds nothing: the problem side has no unmatched terms.
        assert_eq!(r.combined, desired);
    }

    #[test]
    fn behavior_images_yield_behavior_mismatch() {
        let expected = image(ImageKind::ExpectedBehavior, &[r#"{"output":["five"]}"#]);
        let observed = image(ImageKind::ObservedBehavior, &[r#"{"output":["zero"]}"#]);
        let r = rmdcp(&expected, &observed, &SynonymLexicon::default(), RmdcpDirection::BottomUp);
        assert_eq!(r.delta.mu, Mu::BehaviorMismatch);
    }

    #[test]
    fn fresh_state_is_solved_and_untouched() {
        let s = MemberState::new("m1");
        assert!(solved(&s, &SynonymLexicon::default()));
        assert!(coverage(&s).is_empty());
        assert_eq!(s.untouched().len(), 8);
    }

    #[test]
    fn desired_copy_without_existing_is_not_solved() {
        let mut s = MemberState::new("m1");
        let p = image(ImageKind::ProblemDescription, &[r#"{"action":["find"]}"#]);
        *s.image_mut(ImageKind::ProblemDescription) = p.clone();
        let mut d = p;
        d.kind = ImageKind::DesiredSolution;
        *s.image_mut(ImageKind::DesiredSolution) = d;
        assert!(!solved(&s, &SynonymLexicon::default()));
    }

    #[test]
    fn speaker_states_and_listeners_hear() {
        let cues = CueLexicon::default();
        let mut states = vec![MemberState::new("m1"), MemberState::new("m2")];
        let u = utt("I5", "m1", "check the entire length");
        let s = st(r#"{"action":["check"]}"#);
        let kinds = apply_utterance(&mut states, &u, &s, &cls(SolvingRole::SolutionExplanation, DiscourseAct::Statement), &[], &cues);
        assert_eq!(kinds, vec![ImageKind::DesiredSolution]);
        assert_eq!(states[0].image(ImageKind::DesiredSolution).fragments[0].provenance, Provenance::Stated);
        assert_eq!(states[1].image(ImageKind::DesiredSolution).fragments[0].provenance, Provenance::Heard);
        assert!(states[1].touched.contains(&ImageKind::DesiredSolution));
    }

    #[test]
    fn acknowledgments_change_nothing() {
        let cues = CueLexicon::default();
        let mut states = vec![MemberState::new("m1")];
        let before = states.clone();
        let u = utt("I3", "m1", "Okay.");
        let s = st(r#"{"action":["check"]}"#);
        apply_utterance(&mut states, &u, &s, &cls(SolvingRole::SolutionUnderstanding, DiscourseAct::Acknowledgment), &[], &cues);
        assert_eq!(states, before);
    }

    #[test]
    fn hypotheses_are_tentative_and_combining_absorbs() {
        let cues = CueLexicon::default();
        let mut states = vec![MemberState::new("m1")];
        let s = st(r#"{"action":["reset"]}"#);
        apply_utterance(&mut states, &utt("I1", "m1", "maybe reset"), &s, &cls(SolvingRole::Hypothesis, DiscourseAct::Statement), &[], &cues);
        let frag = &states[0].image(ImageKind::NeededChanges).fragments[0];
        assert_eq!(frag.confidence, FragmentConfidence::Tentative);
        let target = [LinkedTarget { id: "I1", role: SolvingRole::Hypothesis }];
        apply_utterance(&mut states, &utt("I2", "m1", "both"), &s, &cls(SolvingRole::Combining, DiscourseAct::Statement), &target, &cues);
        let frag = &states[0].image(ImageKind::NeededChanges).fragments[0];
        assert_eq!(frag.absorbed_by.as_deref(), Some("I2"));
        assert!(states[0].touched.contains(&ImageKind::DesiredSolution));
    }
}
