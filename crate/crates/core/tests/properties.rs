use std::collections::BTreeSet;

use proptest::prelude::*;
use teamtrace::classification::{Classification, Confidence};
use teamtrace::diagnostics::to_canonical_json;
use teamtrace::fixtures::{brute_force_match_oracle, load_fixture, FIXTURE_NAMES};
use teamtrace::images::{rmdcp, Fragment, FragmentConfidence, ImageKind, MentalImage, Mu, Provenance, RmdcpDirection};
use teamtrace::semantics::{match_structures_with, merge_structures, MatchOptions};
use teamtrace::trace::cluster_ideas;
use teamtrace::transcript::serialize_transcript;
use teamtrace::{
    analyze, match_structures, parse_transcript, Config, Direction, DiscourseAct, FlagKind, Lexicons, SemanticStructure,
    SolvingRole, SynonymLexicon,
};

const WORDS: &[&str] = &[
    "sum", "add-up", "larger", "largest", "all", "all-numbers", "entire-length", "count", "tally", "print", "display",
    "compare", "check", "array", "line",
];

fn terms(max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::sample::subsequence(WORDS, 0..=max).prop_map(|v| v.into_iter().map(str::to_string).collect())
}

fn structure() -> impl Strategy<Value = SemanticStructure> {
    let props = proptest::collection::btree_map(
        proptest::sample::select(&["loop", "counter"][..]).prop_map(str::to_string),
        proptest::sample::subsequence(&["many", "few", "sorted"][..], 1..=2)
            .prop_map(|v| v.into_iter().map(str::to_string).collect()),
        0..=2,
    );
    (terms(4), terms(4), terms(3), terms(3), terms(3), props).prop_map(|(action, who, what, goal, output, properties)| {
        SemanticStructure { action, who, what, goal, output, properties }
    })
}

fn syn() -> SynonymLexicon {
    Lexicons::embedded().synonyms
}

fn image(kind: ImageKind, parts: &[SemanticStructure]) -> MentalImage {
    let mut img = MentalImage::new(kind);
    for (i, s) in parts.iter().enumerate() {
        img.push(Fragment {
            structure: s.clone(),
            source: format!("I{}", i + 1),
            author: "a".into(),
            provenance: Provenance::Stated,
            confidence: FragmentConfidence::Firm,
            absorbed_by: None,
        });
    }
    img
}

proptest! {
    #[test]
    fn matching_is_symmetric(a in structure(), b in structure()) {
        let syn = syn();
        let ab = match_structures(&a, &b, &syn);
        let ba = match_structures(&b, &a, &syn);
        prop_assert_eq!(ab.score, ba.score);
        prop_assert_eq!(ab.unmatched_a, ba.unmatched_b);
        prop_assert_eq!(ab.unmatched_b, ba.unmatched_a);
    }

    #[test]
    fn score_is_bounded_and_one_on_self(a in structure(), b in structure()) {
        let syn = syn();
        let s = match_structures(&a, &b, &syn).score.value();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(match_structures(&a, &a, &syn).score.is_one());
    }

    #[test]
    fn cross_slot_never_lowers_the_score(a in structure(), b in structure()) {
        let syn = syn();
        let plain = match_structures_with(&a, &b, &syn, MatchOptions { cross_slot: false });
        let cross = match_structures_with(&a, &b, &syn, MatchOptions { cross_slot: true });
        prop_assert!(cross.score >= plain.score);
        prop_assert_eq!(cross.matched, plain.matched);
    }

    #[test]
    fn more_synonyms_never_lower_the_score(a in structure(), b in structure(), i in 0..WORDS.len(), j in 0..WORDS.len()) {
        let base = syn();
        let wider = base.extended([(WORDS[i], WORDS[j])]);
        prop_assert!(match_structures(&a, &b, &wider).score >= match_structures(&a, &b, &base).score);
    }

    #[test]
    fn matcher_agrees_with_brute_force(a in structure(), b in structure()) {
        let syn = syn();
        prop_assert_eq!(brute_force_match_oracle(&a, &b, &syn).unwrap(), match_structures(&a, &b, &syn).matched.len());
    }

    #[test]
    fn merge_is_idempotent_and_order_free(a in structure(), b in structure()) {
        let syn = syn();
        let ab = merge_structures([&a, &b], &syn);
        prop_assert_eq!(&ab, &merge_structures([&b, &a], &syn));
        prop_assert_eq!(&ab, &merge_structures([&ab, &ab], &syn));
        prop_assert_eq!(merge_structures([&ab], &syn), ab);
    }

    #[test]
    fn clusters_partition_and_refine_with_theta(parts in proptest::collection::vec(structure(), 1..7), lo in 0.1f64..0.5, step in 0.0f64..0.5) {
        let syn = syn();
        let ideas: Vec<(String, &SemanticStructure)> = parts.iter().enumerate().map(|(i, s)| (format!("I{}", i + 1), s)).collect();
        let coarse = cluster_ideas(&ideas, &syn, MatchOptions::default(), lo);
        let fine = cluster_ideas(&ideas, &syn, MatchOptions::default(), lo + step);
        let all: Vec<String> = coarse.iter().flatten().cloned().collect();
        let unique: BTreeSet<&String> = all.iter().collect();
        prop_assert_eq!(all.len(), parts.len());
        prop_assert_eq!(unique.len(), parts.len());
        // A stricter threshold only splits clusters.
        for f in &fine {
            prop_assert!(coarse.iter().any(|c| f.iter().all(|id| c.contains(id))));
        }
    }

    #[test]
    fn rmdcp_difference_and_label_agree(a in structure(), b in structure()) {
        let syn = syn();
        let ia = image(ImageKind::DesiredSolution, std::slice::from_ref(&a));
        let ib = image(ImageKind::ExistingSolution, std::slice::from_ref(&b));
        let r = rmdcp(&ia, &ib, &syn, RmdcpDirection::TopDown);
        prop_assert_eq!(r.delta.difference_is_empty(), r.delta.mu == Mu::Consistent);
        let back = rmdcp(&ib, &ia, &syn, RmdcpDirection::TopDown);
        prop_assert_eq!(back.delta.match_score, r.delta.match_score);
        prop_assert_eq!(back.delta.removals_a, r.delta.removals_b.clone());
        // Combine never drops fragments from its target.
        prop_assert!(r.combined.fragments.starts_with(&ib.fragments));
        prop_assert_eq!(r.combined.fragments.len(), ib.fragments.len() + usize::from(!r.delta.removals_a.is_empty()));
    }

    #[test]
    fn pushing_never_rewrites_fragments(parts in proptest::collection::vec(structure(), 0..6)) {
        let mut img = MentalImage::new(ImageKind::NeededChanges);
        for (i, s) in parts.iter().enumerate() {
            let before = img.fragments.clone();
            img.push(Fragment {
                structure: s.clone(),
                source: format!("I{}", i % 3),
                author: "a".into(),
                provenance: Provenance::Heard,
                confidence: FragmentConfidence::Tentative,
                absorbed_by: None,
            });
            prop_assert!(img.fragments.starts_with(&before));
            prop_assert!(img.fragments.len() <= before.len() + 1);
        }
    }
}

#[test]
fn transcripts_round_trip() {
    for name in FIXTURE_NAMES {
        let t = load_fixture(name).unwrap();
        let text = serialize_transcript(&t);
        assert_eq!(parse_transcript(text.as_bytes()).unwrap(), t, "{name}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let lex = Lexicons::embedded();
    for name in FIXTURE_NAMES {
        let t = load_fixture(name).unwrap();
        let x = analyze(&t, &lex, &Config::default());
        let y = analyze(&t, &lex, &Config::default());
        assert_eq!(to_canonical_json(&x.report), to_canonical_json(&y.report));
        assert_eq!(x.graph.to_dot(), y.graph.to_dot());
        assert_eq!(to_canonical_json(&x.images_report()), to_canonical_json(&y.images_report()));
    }
}

#[test]
fn participation_counts_every_utterance_once() {
    for name in FIXTURE_NAMES {
        let t = load_fixture(name).unwrap();
        let a = analyze(&t, &Lexicons::embedded(), &Config::default());
        let total: usize = a.report.metrics.participation.values().flat_map(|m| m.values()).sum();
        assert_eq!(total, t.utterances.len(), "{name}");
        for (member, roles) in &a.report.metrics.participation {
            let spoken = t.utterances.iter().filter(|u| &u.speaker == member).count();
            assert_eq!(roles.values().sum::<usize>(), spoken, "{name} {member}");
        }
    }
}

#[test]
fn trace_links_point_backward_with_gold_shown_or_hidden() {
    for name in FIXTURE_NAMES {
        let t = load_fixture(name).unwrap();
        for t in [t.clone(), t.without_gold_labels()] {
            let a = analyze(&t, &Lexicons::embedded(), &Config::default());
            for l in &a.graph.links {
                assert!(t.index_of(&l.to).unwrap() < t.index_of(&l.from).unwrap(), "{name}: {l:?}");
            }
            // Several links from one utterance are always all ambiguous.
            for u in &t.utterances {
                let out: Vec<_> = a.graph.links_from(&u.id).collect();
                if out.len() >= 2 {
                    assert!(out.iter().all(|l| l.certainty == teamtrace::Certainty::Ambiguous), "{name} {}", u.id);
                }
            }
        }
    }
}

#[test]
fn raising_the_qa_threshold_never_removes_qa_flags() {
    let t = load_fixture("suture").unwrap();
    let lex = Lexicons::embedded();
    let mut last = 0;
    for tau in [0.0, 0.1, 0.25, 0.4, 0.6, 0.8, 1.0] {
        let mut config = Config::default();
        config.thresholds.tau_qa = tau;
        let a = analyze(&t, &lex, &config);
        let n = a.report.flags.iter().filter(|f| f.kind == FlagKind::QaGap).count();
        assert!(n >= last, "tau_qa {tau}: {n} < {last}");
        last = n;
    }
}

#[test]
fn classification_serializes_with_snake_case_labels() {
    let c = Classification {
        act: DiscourseAct::Question,
        role: SolvingRole::ProblemUnderstanding,
        direction: Direction::BottomUp,
        rule_fired: "x".into(),
        confidence: Confidence::Rule,
    };
    let v = serde_json::to_value(&c).unwrap();
    assert_eq!(v["role"], "problem_understanding");
    assert_eq!(v["direction"], "bottom_up");
}
