//! End-to-end analysis of one transcript, and the gold-hidden evaluation harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::classification::{classify_all, Classification, ClassificationContext, Confidence, SolvingRole};
use crate::config::Config;
use crate::diagnostics::{build_report, infer_scenario, DiagnosticInputs, DiagnosticsReport, Scenario};
use crate::images::{apply_utterance, LinkedTarget, MemberState};
use crate::lexicon::Lexicons;
use crate::semantics::{extract_from_text, extract_structure, MatchOptions, SemanticStructure};
use crate::trace::{cluster_ideas, detailing_chains, link_antecedents, TraceGraph};
use crate::transcript::Transcript;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub problem_structure: SemanticStructure,
    pub structures: Vec<SemanticStructure>,
    pub classifications: Vec<Classification>,
    pub graph: TraceGraph,
    pub chains: Vec<Vec<String>>,
    pub states: Vec<MemberState>,
    pub scenario: Scenario,
    pub report: DiagnosticsReport,
}

/// Per-member images, as written by `analyze --images`.
#[derive(Debug, Clone, Serialize)]
pub struct ImagesReport<'a> {
    pub members: BTreeMap<&'a str, MemberImages<'a>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberImages<'a> {
    pub images: &'a BTreeMap<crate::images::ImageKind, crate::images::MentalImage>,
    pub touched: &'a BTreeSet<crate::images::ImageKind>,
    pub untouched: BTreeSet<crate::images::ImageKind>,
}

impl Analysis {
    pub fn images_report(&self) -> ImagesReport<'_> {
        ImagesReport {
            members: self
                .states
                .iter()
                .map(|s| {
                    (s.member.as_str(), MemberImages { images: &s.images, touched: &s.touched, untouched: s.untouched() })
                })
                .collect(),
        }
    }
}

/// Runs extraction, classification, linking, clustering, image updates and diagnostics.
pub fn analyze(t: &Transcript, lex: &Lexicons, config: &Config) -> Analysis {
    let options = MatchOptions { cross_slot: config.cross_slot };
    let thresholds = &config.thresholds;
    let syn = &lex.synonyms;

    let problem_structure = extract_from_text(&t.problem.statement, &lex.extraction);
    let structures: Vec<SemanticStructure> =
        t.utterances.iter().map(|u| extract_structure(u, &lex.extraction)).collect();

    let mut ctx = ClassificationContext::new(lex, *thresholds, options, problem_structure.clone());
    let mut classifications = classify_all(&t.utterances, &structures, &mut ctx);

    // A later required change pointing at a rule-labelled analysis shows the
    // analysis was really naming a missing piece.
    let first = link_antecedents(t, &classifications, &structures, syn, thresholds, options);
    let mut resolved = false;
    for l in &first.links {
        let (Some(i), Some(j)) = (t.index_of(&l.from), t.index_of(&l.to)) else { continue };
        let from_change = classifications[i].role == SolvingRole::RequiredChange;
        let target = &mut classifications[j];
        if from_change
            && target.role == SolvingRole::Analysis
            && target.confidence == Confidence::Rule
        {
            target.role = SolvingRole::MissingFragment;
            target.rule_fired = "backward_resolution".into();
            resolved = true;
        }
    }
    let mut graph = if resolved {
        link_antecedents(t, &classifications, &structures, syn, thresholds, options)
    } else {
        first
    };

    let ideas: Vec<(String, &SemanticStructure)> = t
        .utterances
        .iter()
        .zip(&classifications)
        .zip(&structures)
        .filter(|((_, c), _)| c.role.is_high_level())
        .map(|((u, _), s)| (u.id.clone(), s))
        .collect();
    graph.clusters = cluster_ideas(&ideas, syn, options, thresholds.theta_cluster);
    let chains = detailing_chains(&graph);

    let mut states: Vec<MemberState> = t.team.members.iter().map(|m| MemberState::new(m)).collect();
    for (i, u) in t.utterances.iter().enumerate() {
        let targets: Vec<LinkedTarget<'_>> = graph
            .links_from(&u.id)
            .filter_map(|l| {
                let j = t.index_of(&l.to)?;
                Some(LinkedTarget { id: &t.utterances[j].id, role: classifications[j].role })
            })
            .collect();
        apply_utterance(&mut states, u, &structures[i], &classifications[i], &targets, &lex.cues);
    }

    let scenario = infer_scenario(t, &classifications, thresholds);
    let inputs = DiagnosticInputs {
        transcript: t,
        structures: &structures,
        classifications: &classifications,
        graph: &graph,
        chains: &chains,
        states: &states,
        syn,
        options,
        thresholds,
    };
    let report = build_report(&inputs, scenario);
    Analysis { problem_structure, structures, classifications, graph, chains, states, scenario, report }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("transcript carries no gold roles to evaluate against")]
    NoGold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub roles: Accuracy,
    /// Restricted to utterances whose text is built from verbatim source words.
    pub quoted_roles: Option<Accuracy>,
    pub per_role: BTreeMap<SolvingRole, Accuracy>,
    /// gold role -> predicted role -> count
    pub confusion: BTreeMap<SolvingRole, BTreeMap<SolvingRole, usize>>,
    pub link_precision: f64,
    pub link_recall: f64,
    pub mismatches: Vec<(String, SolvingRole, SolvingRole)>,
}

/// Hides gold roles, acts and links, reruns the pipeline and compares.
pub fn evaluate(t: &Transcript, lex: &Lexicons, config: &Config, quoted: Option<&BTreeSet<String>>) -> Result<EvalReport, EvalError> {
    let gold: Vec<(usize, SolvingRole)> = t
        .utterances
        .iter()
        .enumerate()
        .filter_map(|(i, u)| Some((i, u.gold.as_ref()?.role?)))
        .collect();
    if gold.is_empty() {
        return Err(EvalError::NoGold);
    }
    let hidden = t.without_gold_labels();
    let a = analyze(&hidden, lex, config);

    let mut roles = Accuracy { correct: 0, total: 0 };
    let mut quoted_roles = quoted.map(|_| Accuracy { correct: 0, total: 0 });
    let mut per_role: BTreeMap<SolvingRole, Accuracy> = BTreeMap::new();
    let mut confusion: BTreeMap<SolvingRole, BTreeMap<SolvingRole, usize>> = BTreeMap::new();
    let mut mismatches = Vec::new();
    for &(i, want) in &gold {
        let got = a.classifications[i].role;
        let hit = usize::from(got == want);
        roles.correct += hit;
        roles.total += 1;
        if let (Some(q), Some(acc)) = (quoted, quoted_roles.as_mut()) {
            if q.contains(&t.utterances[i].id) {
                acc.correct += hit;
                acc.total += 1;
            }
        }
        let r = per_role.entry(want).or_insert(Accuracy { correct: 0, total: 0 });
        r.correct += hit;
        r.total += 1;
        *confusion.entry(want).or_default().entry(got).or_default() += 1;
        if hit == 0 {
            mismatches.push((t.utterances[i].id.clone(), want, got));
        }
    }

    let mut gold_links: BTreeSet<(String, String)> = BTreeSet::new();
    let mut with_gold_links: BTreeSet<&str> = BTreeSet::new();
    for u in &t.utterances {
        if let Some(links) = u.gold.as_ref().and_then(|g| g.links.as_ref()).filter(|l| !l.is_empty()) {
            with_gold_links.insert(&u.id);
            gold_links.extend(links.iter().map(|l| (u.id.clone(), l.to.clone())));
        }
    }
    let predicted: BTreeSet<(String, String)> = a
        .graph
        .links
        .iter()
        .filter(|l| with_gold_links.contains(l.from.as_str()))
        .map(|l| (l.from.clone(), l.to.clone()))
        .collect();
    let hits = predicted.intersection(&gold_links).count() as f64;
    let ratio = |n: f64, d: usize| if d == 0 { 0.0 } else { n / d as f64 };

    Ok(EvalReport {
        roles,
        quoted_roles,
        per_role,
        confusion,
        link_precision: ratio(hits, predicted.len()),
        link_recall: ratio(hits, gold_links.len()),
        mismatches,
    })
}

impl EvalReport {
    /// Plain-text rendering printed by `teamtrace eval`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let acc = |a: &Accuracy| format!("{:.3} ({}/{})", a.value(), a.correct, a.total);
        let _ = writeln!(out, "role accuracy: {}", acc(&self.roles));
        match &self.quoted_roles {
            Some(q) => {
                let _ = writeln!(out, "quoted-text role accuracy: {}", acc(q));
            }
            None => out.push_str("quoted-text role accuracy: n/a (no provenance table)\n"),
        }
        let _ = writeln!(out, "link precision: {:.3}", self.link_precision);
        let _ = writeln!(out, "link recall: {:.3}", self.link_recall);
        out.push_str("per-role accuracy:\n");
        for (role, a) in &self.per_role {
            let _ = writeln!(out, "  {role:<24} {}", acc(a));
        }
        out.push_str("confusion (gold -> predicted):\n");
        for (gold, row) in &self.confusion {
            for (pred, n) in row {
                let _ = writeln!(out, "  {gold:<24} -> {pred:<24} {n}");
            }
        }
        if !self.mismatches.is_empty() {
            out.push_str("mismatches:\n");
            for (id, want, got) in &self.mismatches {
                let _ = writeln!(out, "  {id}: gold {want}, predicted {got}");
            }
        }
        out
    }
}
