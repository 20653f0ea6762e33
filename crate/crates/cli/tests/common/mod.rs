#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use teamtrace::SemanticStructure;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_teamtrace"))
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("TEAMTRACE_LEXICON_DIR").output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Words drawn partly from the shipped synonym classes so random pairs
/// actually exercise synonym edges.
const WORDS: &[&str] = &[
    "sum", "add-up", "larger", "largest", "all", "all-numbers", "entire-length", "count", "tally", "print",
    "display", "compare", "check", "array", "line", "word",
];
const NOUNS: &[&str] = &["loop", "counter", "batch"];
const PROPS: &[&str] = &["many", "few", "sorted", "nested"];

fn terms(max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::sample::subsequence(WORDS, 0..=max).prop_map(|v| v.into_iter().map(str::to_string).collect())
}

/// Random structures with at most `max` terms in every slot.
pub fn structure(max: usize) -> impl Strategy<Value = SemanticStructure> {
    let props = proptest::collection::btree_map(
        proptest::sample::select(NOUNS).prop_map(str::to_string),
        proptest::sample::subsequence(PROPS, 1..=2).prop_map(|v| v.into_iter().map(str::to_string).collect()),
        0..=2,
    )
    .prop_filter("properties within slot limit", move |m| m.values().map(Vec::len).sum::<usize>() <= max);
    (terms(max), terms(max), terms(max), terms(max), terms(max), props).prop_map(|(action, who, what, goal, output, properties)| {
        SemanticStructure { action, who, what, goal, output, properties }
    })
}
