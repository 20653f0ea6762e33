//! Discourse act, solving role and semantic direction of each utterance.
//!
//! Roles come from the gold annotation when present. Otherwise an ordered
//! rule table is applied and the first rule that fires wins:
//!
//! 1. `analogy`: an identity noun names a known technique and the text refers
//!    back to earlier exercises.
//! 2. `restating`: a perfect match with an earlier structure once operation
//!    equivalences count as synonyms.
//! 3. `analysis`: only properties of already discussed terms are new, or the
//!    text cites behavior, execution or causal cues.
//! 4. `missing_fragment`: names something the problem mentions but no earlier
//!    solution structure covers.
//! 5. `required_change` (or `hypothesis` with an uncertainty cue): a modal or
//!    imperative cue plus new terms relative to the best antecedent.
//! 6. `combining`: draws on two earlier ideas that are not related to each other.
//! 7. `problem_understanding` / `problem_explanation`: the structure is covered
//!    by the problem statement and matches it better than any solution idea.
//! 8. `abstracting`: a proper generalization of the best antecedent.
//!
//! Anything left over is a `solution_explanation` when it carries content and
//! `solution_understanding` otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::lexicon::{tokenize, CueKind, Lexicons};
use crate::semantics::{
    equivalent_restating, match_structures_with, merge_structures, MatchOptions, MatchResult, Score,
    SemanticStructure, Slot,
};
use crate::transcript::Utterance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscourseAct {
    Statement,
    Question,
    Answer,
    Acknowledgment,
}

impl DiscourseAct {
    /// Statements and answers carry content a question can be answered with.
    pub fn is_assertive(self) -> bool {
        matches!(self, DiscourseAct::Statement | DiscourseAct::Answer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvingRole {
    ProblemUnderstanding,
    ProblemExplanation,
    SolutionExplanation,
    SolutionUnderstanding,
    Comparison,
    Analysis,
    MissingFragment,
    RequiredChange,
    Combining,
    Restating,
    Abstracting,
    Analogy,
    Hypothesis,
}

impl SolvingRole {
    pub const ALL: [SolvingRole; 13] = [
        SolvingRole::ProblemUnderstanding,
        SolvingRole::ProblemExplanation,
        SolvingRole::SolutionExplanation,
        SolvingRole::SolutionUnderstanding,
        SolvingRole::Comparison,
        SolvingRole::Analysis,
        SolvingRole::MissingFragment,
        SolvingRole::RequiredChange,
        SolvingRole::Combining,
        SolvingRole::Restating,
        SolvingRole::Abstracting,
        SolvingRole::Analogy,
        SolvingRole::Hypothesis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolvingRole::ProblemUnderstanding => "problem_understanding",
            SolvingRole::ProblemExplanation => "problem_explanation",
            SolvingRole::SolutionExplanation => "solution_explanation",
            SolvingRole::SolutionUnderstanding => "solution_understanding",
            SolvingRole::Comparison => "comparison",
            SolvingRole::Analysis => "analysis",
            SolvingRole::MissingFragment => "missing_fragment",
            SolvingRole::RequiredChange => "required_change",
            SolvingRole::Combining => "combining",
            SolvingRole::Restating => "restating",
            SolvingRole::Abstracting => "abstracting",
            SolvingRole::Analogy => "analogy",
            SolvingRole::Hypothesis => "hypothesis",
        }
    }

    /// Roles whose structures describe (part of) a solution.
    pub fn describes_solution(self) -> bool {
        matches!(
            self,
            SolvingRole::SolutionExplanation
                | SolvingRole::Analogy
                | SolvingRole::Restating
                | SolvingRole::Abstracting
                | SolvingRole::Combining
                | SolvingRole::RequiredChange
                | SolvingRole::MissingFragment
                | SolvingRole::Hypothesis
        )
    }

    /// Roles of high-level idea nodes, the ones grouped into clusters.
    pub fn is_high_level(self) -> bool {
        matches!(self, SolvingRole::SolutionExplanation | SolvingRole::Analogy)
    }

    pub fn is_problem_talk(self) -> bool {
        matches!(self, SolvingRole::ProblemUnderstanding | SolvingRole::ProblemExplanation)
    }
}

impl fmt::Display for SolvingRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TopDown,
    BottomUp,
    Lateral,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Gold,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub act: DiscourseAct,
    pub role: SolvingRole,
    pub direction: Direction,
    pub rule_fired: String,
    pub confidence: Confidence,
}

/// Act of an utterance given the previous one (with its act), if any.
pub fn classify_act(u: &Utterance, previous: Option<(&Utterance, DiscourseAct)>, lex: &Lexicons) -> DiscourseAct {
    if let Some(act) = u.gold.as_ref().and_then(|g| g.act) {
        return act;
    }
    let text = u.text.trim();
    let tokens = tokenize(text);
    let first = tokens.first().map(String::as_str).unwrap_or("");
    let interrogative = lex.cues.phrases(CueKind::Interrogative).iter().any(|w| w == first);
    if text.ends_with('?') || interrogative {
        return DiscourseAct::Question;
    }
    if is_acknowledgment(&tokens, lex) {
        return DiscourseAct::Acknowledgment;
    }
    match previous {
        Some((prev, DiscourseAct::Question)) if prev.speaker != u.speaker => DiscourseAct::Answer,
        _ => DiscourseAct::Statement,
    }
}

/// Short utterances made only of acknowledgment cues and fillers.
fn is_acknowledgment(tokens: &[String], lex: &Lexicons) -> bool {
    const FILLERS: [&str; 6] = ["oh", "ah", "i", "see", "then", "alright"];
    if tokens.is_empty() || tokens.len() > 5 {
        return false;
    }
    let cues: Vec<Vec<String>> = lex.cues.phrases(CueKind::Acknowledgment).iter().map(|c| tokenize(c)).collect();
    let mut i = 0;
    let mut saw_cue = false;
    while i < tokens.len() {
        if let Some(cue) = cues.iter().filter(|c| !c.is_empty()).find(|c| tokens[i..].starts_with(c)) {
            i += cue.len();
            saw_cue = true;
        } else if FILLERS.contains(&tokens[i].as_str()) {
            i += 1;
        } else {
            return false;
        }
    }
    saw_cue
}

/// One earlier utterance as seen by the classifier.
#[derive(Debug, Clone)]
pub struct Prior {
    pub index: usize,
    pub structure: SemanticStructure,
    pub classification: Classification,
}

/// Everything the rules may consult about the transcript so far.
#[derive(Debug, Clone)]
pub struct ClassificationContext<'a> {
    pub lex: &'a Lexicons,
    pub thresholds: Thresholds,
    pub options: MatchOptions,
    pub problem: SemanticStructure,
    pub priors: Vec<Prior>,
}

impl<'a> ClassificationContext<'a> {
    pub fn new(lex: &'a Lexicons, thresholds: Thresholds, options: MatchOptions, problem: SemanticStructure) -> Self {
        ClassificationContext { lex, thresholds, options, problem, priors: Vec::new() }
    }

    fn score(&self, a: &SemanticStructure, b: &SemanticStructure) -> MatchResult {
        match_structures_with(a, b, &self.lex.synonyms, self.options)
    }

    /// Highest-scoring earlier structure-bearing utterance; ties go to the most recent.
    pub fn best_antecedent(&self, s: &SemanticStructure) -> Option<(&Prior, MatchResult)> {
        let mut best: Option<(&Prior, MatchResult)> = None;
        for p in self.priors.iter().filter(|p| !p.structure.is_empty()) {
            let m = self.score(s, &p.structure);
            if best.as_ref().is_none_or(|(_, b)| m.score >= b.score) {
                best = Some((p, m));
            }
        }
        best
    }

    /// Earlier utterances whose score is within the ambiguity margin of the best one.
    fn near_best(&self, s: &SemanticStructure) -> usize {
        let scores: Vec<Score> = self
            .priors
            .iter()
            .filter(|p| !p.structure.is_empty())
            .map(|p| self.score(s, &p.structure).score)
            .collect();
        let Some(best) = scores.iter().max().copied() else { return 0 };
        if !best.at_least(self.thresholds.tau_link) {
            return 0;
        }
        scores.iter().filter(|x| x.at_least(best.value() - self.thresholds.eps_margin)).count()
    }

    pub fn push(&mut self, index: usize, structure: SemanticStructure, classification: Classification) {
        self.priors.push(Prior { index, structure, classification });
    }
}

/// Whether every term of `s` has a same-slot counterpart in `reference`.
fn covered(term_slot: Slot, term: &str, reference: &SemanticStructure, lex: &Lexicons) -> bool {
    reference
        .slot_terms(term_slot)
        .iter()
        .any(|r| crate::semantics::terms_match(term_slot, term, r, &lex.synonyms))
}

/// Role of an utterance. `act` is the already classified act.
pub fn classify_role(
    u: &Utterance,
    s: &SemanticStructure,
    act: DiscourseAct,
    ctx: &ClassificationContext<'_>,
) -> (SolvingRole, &'static str, Confidence) {
    if let Some(role) = u.gold.as_ref().and_then(|g| g.role) {
        return (role, "gold", Confidence::Gold);
    }
    let (role, rule) = rule_role(u, s, act, ctx);
    (role, rule, Confidence::Rule)
}

fn rule_role(u: &Utterance, s: &SemanticStructure, act: DiscourseAct, ctx: &ClassificationContext<'_>) -> (SolvingRole, &'static str) {
    let lex = ctx.lex;
    let cues = &lex.cues;
    let fallback = if !s.is_empty() && act.is_assertive() {
        (SolvingRole::SolutionExplanation, "default_content")
    } else {
        (SolvingRole::SolutionUnderstanding, "default_contentless")
    };
    if s.is_empty() {
        return fallback;
    }
    let text = &u.text;
    let with_structure: Vec<&Prior> = ctx.priors.iter().filter(|p| !p.structure.is_empty()).collect();

    // 1. analogy
    if s.what.iter().any(|t| cues.lists_term(CueKind::AnalogyTerm, t)) && cues.mentions(CueKind::AnalogyReference, text) {
        return (SolvingRole::Analogy, "analogy_reference");
    }

    // 2. restating
    if with_structure
        .iter()
        .any(|p| equivalent_restating(&p.structure, s, &lex.synonyms, &lex.equivalences))
    {
        return (SolvingRole::Restating, "equivalent_restating");
    }

    // 3. analysis
    let merged_prior = merge_structures(with_structure.iter().map(|p| &p.structure), &lex.synonyms);
    if !s.properties.is_empty() {
        let plain_known = s
            .iter_terms()
            .filter(|(slot, _)| *slot != Slot::Properties)
            .all(|(slot, t)| covered(slot, &t, &merged_prior, lex));
        let new_property = s
            .slot_terms(Slot::Properties)
            .iter()
            .any(|t| !covered(Slot::Properties, t, &merged_prior, lex));
        if plain_known && new_property && !with_structure.is_empty() {
            return (SolvingRole::Analysis, "property_delta");
        }
    }
    if [CueKind::Behavior, CueKind::Execution, CueKind::Causal]
        .into_iter()
        .any(|k| cues.mentions(k, text))
    {
        return (SolvingRole::Analysis, "behavior_cue");
    }

    // 4. missing fragment
    let solution_parts: Vec<&SemanticStructure> = with_structure
        .iter()
        .filter(|p| p.classification.role.describes_solution())
        .map(|p| &p.structure)
        .collect();
    if !solution_parts.is_empty() {
        let merged_solution = merge_structures(solution_parts.iter().copied(), &lex.synonyms);
        let names_missing = [Slot::Action, Slot::Who, Slot::Goal, Slot::Output].into_iter().any(|slot| {
            s.slot(slot)
                .iter()
                .any(|t| !covered(slot, t, &merged_solution, lex) && covered(slot, t, &ctx.problem, lex))
        });
        if names_missing {
            return (SolvingRole::MissingFragment, "problem_requirement_uncovered");
        }
    }

    // 5./6. required change, hypothesis
    if cues.mentions(CueKind::Modal, text) {
        let adds_terms = match ctx.best_antecedent(s) {
            Some((_, m)) => !m.unmatched_a.is_empty(),
            None => true,
        };
        if adds_terms {
            return if cues.mentions(CueKind::Uncertainty, text) {
                (SolvingRole::Hypothesis, "modal_uncertain_delta")
            } else {
                (SolvingRole::RequiredChange, "modal_delta")
            };
        }
    }

    // 7. combining
    let ideas: Vec<&Prior> = with_structure
        .iter()
        .copied()
        .filter(|p| p.classification.role.is_high_level())
        .collect();
    let tau = ctx.thresholds.tau_link;
    for (i, p) in ideas.iter().enumerate() {
        for q in &ideas[i + 1..] {
            if ctx.score(&p.structure, &q.structure).score.at_least(ctx.thresholds.theta_cluster) {
                continue;
            }
            if !ctx.score(s, &p.structure).score.at_least(tau) || !ctx.score(s, &q.structure).score.at_least(tau) {
                continue;
            }
            let only_in = |x: &SemanticStructure, y: &SemanticStructure| {
                s.iter_terms()
                    .any(|(slot, t)| covered(slot, &t, x, lex) && !covered(slot, &t, y, lex))
            };
            if only_in(&p.structure, &q.structure) && only_in(&q.structure, &p.structure) {
                return (SolvingRole::Combining, "two_unrelated_ideas");
            }
        }
    }

    // 8. problem talk
    let against_problem = ctx.score(s, &ctx.problem);
    if !ctx.problem.is_empty() && against_problem.score.at_least(tau) && against_problem.unmatched_a.is_empty() {
        let best_solution = with_structure
            .iter()
            .filter(|p| p.classification.role.describes_solution())
            .map(|p| ctx.score(s, &p.structure).score)
            .max();
        if best_solution.is_none_or(|b| against_problem.score > b) {
            return if act == DiscourseAct::Question {
                (SolvingRole::ProblemUnderstanding, "problem_match_question")
            } else {
                (SolvingRole::ProblemExplanation, "problem_match_statement")
            };
        }
    }

    // 9. abstracting
    if let Some((_, m)) = ctx.best_antecedent(s) {
        if m.score.at_least(tau) && m.unmatched_a.is_empty() && !m.unmatched_b.is_empty() {
            return (SolvingRole::Abstracting, "proper_generalization");
        }
    }

    fallback
}

/// Direction of an utterance relative to its best antecedent.
pub fn classify_direction(s: &SemanticStructure, role: SolvingRole, ctx: &ClassificationContext<'_>) -> Direction {
    if s.is_empty() {
        return Direction::None;
    }
    let Some((p, m)) = ctx.best_antecedent(s) else { return Direction::None };
    if !m.score.at_least(ctx.thresholds.tau_link) {
        return Direction::None;
    }
    if equivalent_restating(&p.structure, s, &ctx.lex.synonyms, &ctx.lex.equivalences) {
        return Direction::Lateral;
    }
    // m is (s, antecedent): unmatched_a are the utterance's extra terms.
    if m.unmatched_b.is_empty() && !m.unmatched_a.is_empty() {
        return Direction::TopDown;
    }
    if m.unmatched_a.is_empty() && !m.unmatched_b.is_empty() {
        return Direction::BottomUp;
    }
    if role == SolvingRole::Abstracting || (role == SolvingRole::Analysis && ctx.near_best(s) >= 2) {
        return Direction::BottomUp;
    }
    Direction::None
}

/// Classifies every utterance in order. `structures[i]` belongs to `utterances[i]`.
pub fn classify_all(
    utterances: &[Utterance],
    structures: &[SemanticStructure],
    ctx: &mut ClassificationContext<'_>,
) -> Vec<Classification> {
    let mut out: Vec<Classification> = Vec::with_capacity(utterances.len());
    for (i, (u, s)) in utterances.iter().zip(structures).enumerate() {
        let previous = i.checked_sub(1).map(|j| (&utterances[j], out[j].act));
        let act = classify_act(u, previous, ctx.lex);
        let (role, rule, confidence) = classify_role(u, s, act, ctx);
        let direction = classify_direction(s, role, ctx);
        let c = Classification { act, role, direction, rule_fired: rule.to_string(), confidence };
        ctx.push(i, s.clone(), c.clone());
        out.push(c);
    }
    out
}
