//! Backward links between utterances, idea clusters and detailing chains.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classification::{Classification, DiscourseAct, SolvingRole};
use crate::config::Thresholds;
use crate::lexicon::SynonymLexicon;
use crate::semantics::{match_structures_with, MatchOptions, Score, SemanticStructure};
use crate::transcript::Transcript;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Details,
    Restates,
    Analyzes,
    Answers,
    CombinesWith,
    ClarifiesProblem,
    Contrasts,
}

impl LinkKind {
    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Details => "details",
            LinkKind::Restates => "restates",
            LinkKind::Analyzes => "analyzes",
            LinkKind::Answers => "answers",
            LinkKind::CombinesWith => "combines_with",
            LinkKind::ClarifiesProblem => "clarifies_problem",
            LinkKind::Contrasts => "contrasts",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Certain,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceLink {
    pub from: String,
    pub to: String,
    pub kind: LinkKind,
    pub certainty: Certainty,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceNode {
    pub id: String,
    pub speaker: String,
    pub role: SolvingRole,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraceGraph {
    pub nodes: Vec<TraceNode>,
    pub links: Vec<TraceLink>,
    /// Groups of high-level idea nodes, each in transcript order.
    pub clusters: Vec<Vec<String>>,
}

/// Link kind implied by the linking utterance's role and act.
pub fn link_kind(role: SolvingRole, act: DiscourseAct) -> LinkKind {
    match role {
        SolvingRole::RequiredChange | SolvingRole::MissingFragment | SolvingRole::Hypothesis => LinkKind::Details,
        SolvingRole::Restating => LinkKind::Restates,
        SolvingRole::Analysis | SolvingRole::Comparison => LinkKind::Analyzes,
        SolvingRole::Combining => LinkKind::CombinesWith,
        SolvingRole::ProblemUnderstanding | SolvingRole::ProblemExplanation => LinkKind::ClarifiesProblem,
        SolvingRole::Analogy => LinkKind::Contrasts,
        _ if act == DiscourseAct::Answer => LinkKind::Answers,
        _ => LinkKind::Restates,
    }
}

impl TraceGraph {
    fn position(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }

    pub fn links_from<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a TraceLink> + 'a {
        self.links.iter().filter(move |l| l.from == id)
    }

    pub fn node(&self, id: &str) -> Option<&TraceNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Graphviz rendering: solid edges for certain links, dashed for ambiguous ones.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph trace {\n  rankdir=BT;\n  node [shape=box];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{}\" [label=\"{}\\n{}\"];", n.id, n.id, n.role);
        }
        for (i, cluster) in self.clusters.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label=\"idea {}\";", i + 1);
            for id in cluster {
                let _ = writeln!(out, "    \"{id}\";");
            }
            out.push_str("  }\n");
        }
        for l in &self.links {
            let style = match l.certainty {
                Certainty::Certain => "",
                Certainty::Ambiguous => ", style=dashed",
            };
            let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"{}];", l.from, l.to, l.kind.name(), style);
        }
        out.push_str("}\n");
        out
    }
}

/// Computes (or copies from gold) the backward links of every utterance.
/// Clusters are left empty; see [`cluster_ideas`].
pub fn link_antecedents(
    t: &Transcript,
    cls: &[Classification],
    structures: &[SemanticStructure],
    syn: &SynonymLexicon,
    thresholds: &Thresholds,
    options: MatchOptions,
) -> TraceGraph {
    let nodes: Vec<TraceNode> = t
        .utterances
        .iter()
        .zip(cls)
        .map(|(u, c)| TraceNode { id: u.id.clone(), speaker: u.speaker.clone(), role: c.role })
        .collect();
    let mut links = Vec::new();
    let score = |i: usize, j: usize| match_structures_with(&structures[i], &structures[j], syn, options).score;

    for (i, u) in t.utterances.iter().enumerate() {
        if let Some(gold) = u.gold.as_ref().and_then(|g| g.links.as_ref()).filter(|l| !l.is_empty()) {
            for g in gold {
                let Some(j) = t.index_of(&g.to) else { continue };
                links.push(TraceLink {
                    from: u.id.clone(),
                    to: g.to.clone(),
                    kind: g.kind,
                    certainty: g.certainty,
                    score: score(i, j),
                });
            }
            continue;
        }
        if structures[i].is_empty() {
            continue;
        }
        let kind = link_kind(cls[i].role, cls[i].act);
        let candidates: Vec<(usize, Score)> =
            (0..i).filter(|&j| !structures[j].is_empty()).map(|j| (j, score(i, j))).collect();
        let best = candidates.iter().map(|&(_, s)| s).max();
        match best {
            Some(best) if best.at_least(thresholds.tau_link) => {
                let near: Vec<(usize, Score)> = candidates
                    .iter()
                    .copied()
                    .filter(|(_, s)| s.at_least(best.value() - thresholds.eps_margin))
                    .collect();
                let certainty = if near.len() >= 2 { Certainty::Ambiguous } else { Certainty::Certain };
                for (j, s) in near {
                    links.push(TraceLink { from: u.id.clone(), to: t.utterances[j].id.clone(), kind, certainty, score: s });
                }
            }
            _ if cls[i].role == SolvingRole::RequiredChange => {
                if let Some(j) = (0..i).rev().find(|&j| cls[j].role.is_high_level()) {
                    links.push(TraceLink {
                        from: u.id.clone(),
                        to: t.utterances[j].id.clone(),
                        kind,
                        certainty: Certainty::Ambiguous,
                        score: score(i, j),
                    });
                }
            }
            _ => {}
        }
    }
    TraceGraph { nodes, links, clusters: Vec::new() }
}

/// Single-linkage grouping of `(id, structure)` idea nodes given in transcript
/// order: two nodes share a cluster when a chain of pairs scoring at least
/// `theta` connects them.
pub fn cluster_ideas(
    ideas: &[(String, &SemanticStructure)],
    syn: &SynonymLexicon,
    options: MatchOptions,
    theta: f64,
) -> Vec<Vec<String>> {
    let n = ideas.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if match_structures_with(ideas[i].1, ideas[j].1, syn, options).score.at_least(theta) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                // Keep the earliest node as root so cluster order follows first appearance.
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, (id, _)) in ideas.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(id.clone());
    }
    groups.into_values().collect()
}

/// Every maximal path over `details` links, root first. Sorted by length
/// (in links) descending, then by the root's and following nodes' order.
pub fn detailing_chains(g: &TraceGraph) -> Vec<Vec<String>> {
    let pos = g.position();
    let n = g.nodes.len();
    // targets[i]: nodes that i details; detailed_by[j]: nodes detailing j.
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut detailed_by = vec![false; n];
    for l in g.links.iter().filter(|l| l.kind == LinkKind::Details) {
        if let (Some(&i), Some(&j)) = (pos.get(l.from.as_str()), pos.get(l.to.as_str())) {
            if !targets[i].contains(&j) {
                targets[i].push(j);
                detailed_by[j] = true;
            }
        }
    }
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if detailed_by[start] || targets[start].is_empty() {
            continue;
        }
        let mut stack = vec![vec![start]];
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("paths are non-empty");
            if targets[last].is_empty() {
                paths.push(path);
                continue;
            }
            for &next in &targets[last] {
                let mut p = path.clone();
                p.push(next);
                stack.push(p);
            }
        }
    }
    for p in &mut paths {
        p.reverse();
    }
    paths.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    paths
        .into_iter()
        .map(|p| p.into_iter().map(|i| g.nodes[i].id.clone()).collect())
        .collect()
}

/// Length in links of a chain returned by [`detailing_chains`].
pub fn chain_length(chain: &[String]) -> usize {
    chain.len().saturating_sub(1)
}
