//! Team-level scenario, solution-space metrics and inefficiency flags.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classification::{Classification, DiscourseAct, SolvingRole};
use crate::config::Thresholds;
use crate::images::{ImageKind, MemberState};
use crate::lexicon::SynonymLexicon;
use crate::semantics::{match_structures_with, MatchOptions, SemanticStructure};
use crate::trace::{chain_length, Certainty, TraceGraph};
use crate::transcript::{InitialState, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    CompleteSolutions,
    PartialFragments,
    NoSolutions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Metadata,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub source: ScenarioSource,
}

impl ScenarioKind {
    /// Images a team in this scenario is expected to work on.
    pub fn expected_images(self) -> Vec<ImageKind> {
        use ImageKind::*;
        match self {
            ScenarioKind::CompleteSolutions => ImageKind::ALL.to_vec(),
            ScenarioKind::PartialFragments => vec![
                ProblemDescription,
                DesiredSolution,
                ExistingSolution,
                ExpectedBehavior,
                ObservedBehavior,
                NeededChanges,
                CausalityOfDifferences,
            ],
            ScenarioKind::NoSolutions => vec![ProblemDescription, DesiredSolution, NeededChanges, ExpectedBehavior],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    QaGap,
    TrialAndErrorRun,
    RepeatedExplanation,
    AmbiguousLink,
    ImageCoverageGap,
    ShallowEngagement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InefficiencyFlag {
    pub kind: FlagKind,
    pub utterances: Vec<String>,
    pub member: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub breadth: usize,
    pub depth: usize,
    pub participation: BTreeMap<String, BTreeMap<SolvingRole, usize>>,
    pub flexibility: BTreeMap<String, usize>,
    pub image_coverage: BTreeMap<String, BTreeSet<ImageKind>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticsReport {
    pub scenario: Scenario,
    pub metrics: Metrics,
    pub flags: Vec<InefficiencyFlag>,
    pub solved: BTreeMap<String, bool>,
}

/// Frozen pipeline outputs the diagnostics read.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticInputs<'a> {
    pub transcript: &'a Transcript,
    pub structures: &'a [SemanticStructure],
    pub classifications: &'a [Classification],
    pub graph: &'a TraceGraph,
    pub chains: &'a [Vec<String>],
    pub states: &'a [MemberState],
    pub syn: &'a SynonymLexicon,
    pub options: MatchOptions,
    pub thresholds: &'a Thresholds,
}

impl DiagnosticInputs<'_> {
    fn score(&self, i: usize, j: usize) -> crate::semantics::Score {
        match_structures_with(&self.structures[i], &self.structures[j], self.syn, self.options).score
    }
}

/// Metadata wins when present; otherwise the role mix of the opening stretch decides.
pub fn infer_scenario(t: &Transcript, cls: &[Classification], thresholds: &Thresholds) -> Scenario {
    let from_metadata = match t.team.initial_state {
        InitialState::Complete => Some(ScenarioKind::CompleteSolutions),
        InitialState::Partial => Some(ScenarioKind::PartialFragments),
        InitialState::None => Some(ScenarioKind::NoSolutions),
        InitialState::Unknown => None,
    };
    if let Some(kind) = from_metadata {
        return Scenario { kind, source: ScenarioSource::Metadata };
    }
    let n = cls.len();
    let window = &cls[..n.min(4.max(n.div_ceil(4)))];
    let len = window.len().max(1) as f64;
    let share = |pred: &dyn Fn(&Classification) -> bool| window.iter().filter(|c| pred(c)).count() as f64 / len;
    let problem = share(&|c| c.role.is_problem_talk());
    let solution = share(&|c| c.role == SolvingRole::SolutionExplanation);
    let questions = share(&|c| c.act == DiscourseAct::Question);
    let kind = if problem >= thresholds.problem_share - 1e-9 {
        ScenarioKind::NoSolutions
    } else if solution >= thresholds.solution_share - 1e-9 && questions <= thresholds.question_share + 1e-9 {
        ScenarioKind::CompleteSolutions
    } else {
        ScenarioKind::PartialFragments
    };
    Scenario { kind, source: ScenarioSource::Heuristic }
}

pub fn detect_flags(inputs: &DiagnosticInputs<'_>, scenario: Scenario) -> Vec<InefficiencyFlag> {
    let t = inputs.transcript;
    let cls = inputs.classifications;
    let th = inputs.thresholds;
    let us = &t.utterances;
    let id = |i: usize| us[i].id.clone();
    let mut flags = Vec::new();

    for (i, c) in cls.iter().enumerate() {
        if c.act != DiscourseAct::Question {
            continue;
        }
        let reply = (i + 1..us.len()).find(|&j| cls[j].act.is_assertive() && us[j].speaker != us[i].speaker);
        if let Some(j) = reply {
            let s = inputs.score(i, j);
            if !s.at_least(th.tau_qa) {
                flags.push(InefficiencyFlag {
                    kind: FlagKind::QaGap,
                    utterances: vec![id(i), id(j)],
                    member: Some(us[j].speaker.clone()),
                    detail: format!("reply matches the question at {:.3}", s.value()),
                });
            }
        }
    }

    let mut run: Vec<usize> = Vec::new();
    let close_run = |run: &mut Vec<usize>, flags: &mut Vec<InefficiencyFlag>| {
        if run.len() >= 3 {
            flags.push(InefficiencyFlag {
                kind: FlagKind::TrialAndErrorRun,
                utterances: run.iter().map(|&i| id(i)).collect(),
                member: None,
                detail: format!("{} change attempts without analysis in between", run.len()),
            });
        }
        run.clear();
    };
    for (i, c) in cls.iter().enumerate() {
        match c.role {
            SolvingRole::Hypothesis | SolvingRole::RequiredChange if c.act != DiscourseAct::Acknowledgment => run.push(i),
            _ if c.act == DiscourseAct::Acknowledgment => {}
            _ => close_run(&mut run, &mut flags),
        }
    }
    close_run(&mut run, &mut flags);

    for i in 0..us.len() {
        for j in i + 1..us.len() {
            let both_explain = cls[i].role == SolvingRole::SolutionExplanation && cls[j].role == SolvingRole::SolutionExplanation;
            if both_explain && us[i].speaker == us[j].speaker {
                let s = inputs.score(i, j);
                if s.at_least(th.repeated_explanation) {
                    flags.push(InefficiencyFlag {
                        kind: FlagKind::RepeatedExplanation,
                        utterances: vec![id(i), id(j)],
                        member: Some(us[i].speaker.clone()),
                        detail: format!("same member explains again at {:.3}", s.value()),
                    });
                }
            }
        }
    }

    for (i, u) in us.iter().enumerate() {
        let ambiguous: Vec<&str> = inputs
            .graph
            .links_from(&u.id)
            .filter(|l| l.certainty == Certainty::Ambiguous)
            .map(|l| l.to.as_str())
            .collect();
        if ambiguous.is_empty() {
            continue;
        }
        let mut ids: Vec<usize> = ambiguous.iter().filter_map(|to| t.index_of(to)).collect();
        ids.push(i);
        ids.sort_unstable();
        ids.dedup();
        flags.push(InefficiencyFlag {
            kind: FlagKind::AmbiguousLink,
            utterances: ids.into_iter().map(id).collect(),
            member: Some(u.speaker.clone()),
            detail: format!("unclear antecedent among {}", ambiguous.join(", ")),
        });
    }

    let expected = scenario.kind.expected_images();
    for state in inputs.states {
        let mut spoken: Vec<String> = us.iter().filter(|u| u.speaker == state.member).map(|u| u.id.clone()).collect();
        if spoken.is_empty() {
            spoken.push(id(0));
        }
        for kind in &expected {
            if !state.touched.contains(kind) {
                flags.push(InefficiencyFlag {
                    kind: FlagKind::ImageCoverageGap,
                    utterances: spoken.clone(),
                    member: Some(state.member.clone()),
                    detail: format!("{kind} never worked on"),
                });
            }
        }
    }

    if scenario.kind == ScenarioKind::CompleteSolutions {
        let lengths: Vec<usize> = inputs.chains.iter().map(|c| chain_length(c)).collect();
        let mean = if lengths.is_empty() { 0.0 } else { lengths.iter().sum::<usize>() as f64 / lengths.len() as f64 };
        if mean < 2.0 {
            let mut ids: Vec<String> = (0..us.len()).filter(|&i| cls[i].role.is_high_level()).map(id).collect();
            if ids.is_empty() {
                ids = us.iter().map(|u| u.id.clone()).collect();
            }
            flags.push(InefficiencyFlag {
                kind: FlagKind::ShallowEngagement,
                utterances: ids,
                member: None,
                detail: format!("mean detailing chain length {mean:.3}"),
            });
        }
    }

    let order = |u: &String| t.index_of(u).unwrap_or(usize::MAX);
    flags.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then_with(|| a.utterances.iter().map(order).cmp(b.utterances.iter().map(order)))
            .then_with(|| a.member.cmp(&b.member))
            .then_with(|| a.detail.cmp(&b.detail))
    });
    flags
}

pub fn compute_metrics(inputs: &DiagnosticInputs<'_>) -> Metrics {
    let t = inputs.transcript;
    let g = inputs.graph;
    let members = &t.team.members;

    let mut participation: BTreeMap<String, BTreeMap<SolvingRole, usize>> =
        members.iter().map(|m| (m.clone(), BTreeMap::new())).collect();
    for (u, c) in t.utterances.iter().zip(inputs.classifications) {
        *participation.entry(u.speaker.clone()).or_default().entry(c.role).or_default() += 1;
    }

    let founder: BTreeMap<&str, &str> = g
        .clusters
        .iter()
        .filter_map(|c| {
            let first = g.node(c.first()?)?;
            Some(c.iter().map(move |id| (id.as_str(), first.speaker.as_str())))
        })
        .flatten()
        .collect();
    let mut flexibility: BTreeMap<String, usize> = members.iter().map(|m| (m.clone(), 0)).collect();
    for l in &g.links {
        let Some(from) = g.node(&l.from) else { continue };
        if founder.get(l.to.as_str()).is_some_and(|f| *f != from.speaker) {
            *flexibility.entry(from.speaker.clone()).or_default() += 1;
        }
    }

    Metrics {
        breadth: g.clusters.len(),
        depth: inputs.chains.iter().map(|c| chain_length(c)).max().unwrap_or(0),
        participation,
        flexibility,
        image_coverage: inputs.states.iter().map(|s| (s.member.clone(), s.touched.clone())).collect(),
    }
}

pub fn build_report(inputs: &DiagnosticInputs<'_>, scenario: Scenario) -> DiagnosticsReport {
    DiagnosticsReport {
        scenario,
        metrics: compute_metrics(inputs),
        flags: detect_flags(inputs, scenario),
        solved: inputs
            .states
            .iter()
            .map(|s| (s.member.clone(), crate::images::solved(s, inputs.syn)))
            .collect(),
    }
}

/// Pretty JSON with object keys sorted, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always print");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::{Confidence, Direction};
    use crate::transcript::{ProblemMeta, TeamMeta, Utterance};

    fn transcript(n: usize, state: InitialState) -> Transcript {
        Transcript {
            problem: ProblemMeta { id: "p".into(), statement: "s".into(), tests: None },
            team: TeamMeta { members: vec!["a".into(), "b".into()], initial_state: state },
            utterances: (1..=n)
                .map(|i| Utterance {
                    id: format!("I{i}"),
                    speaker: if i % 2 == 0 { "b".into() } else { "a".into() },
                    order: i as i64,
                    text: "x".into(),
                    gold: None,
                })
                .collect(),
        }
    }

    fn c(role: SolvingRole, act: DiscourseAct) -> Classification {
        Classification { act, role, direction: Direction::None, rule_fired: "t".into(), confidence: Confidence::Rule }
    }

    #[test]
    fn metadata_wins() {
        let t = transcript(2, InitialState::None);
        let s = infer_scenario(&t, &[], &Thresholds::default());
        assert_eq!(s, Scenario { kind: ScenarioKind::NoSolutions, source: ScenarioSource::Metadata });
    }

    #[test]
    fn problem_heavy_opening_means_no_solutions() {
        let t = transcript(8, InitialState::Unknown);
        let mut cls = vec![c(SolvingRole::ProblemUnderstanding, DiscourseAct::Question); 4];
        cls.extend(vec![c(SolvingRole::SolutionExplanation, DiscourseAct::Statement); 4]);
        assert_eq!(infer_scenario(&t, &cls, &Thresholds::default()).kind, ScenarioKind::NoSolutions);
    }

    #[test]
    fn explanation_heavy_quiet_opening_means_complete() {
        let t = transcript(4, InitialState::Unknown);
        let cls = vec![c(SolvingRole::SolutionExplanation, DiscourseAct::Statement); 4];
        assert_eq!(infer_scenario(&t, &cls, &Thresholds::default()).kind, ScenarioKind::CompleteSolutions);
        let mut with_question = cls.clone();
        with_question[3] = c(SolvingRole::SolutionExplanation, DiscourseAct::Question);
        assert_eq!(infer_scenario(&t, &with_question, &Thresholds::default()).kind, ScenarioKind::PartialFragments);
    }

    #[test]
    fn expected_image_sets_have_documented_sizes() {
        assert_eq!(ScenarioKind::CompleteSolutions.expected_images().len(), 8);
        assert_eq!(ScenarioKind::PartialFragments.expected_images().len(), 7);
        assert_eq!(ScenarioKind::NoSolutions.expected_images().len(), 4);
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let mut m = serde_json::Map::new();
        m.insert("b".into(), 1.into());
        m.insert("a".into(), 2.into());
        let s = to_canonical_json(&m);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.ends_with('\n'));
    }
}
