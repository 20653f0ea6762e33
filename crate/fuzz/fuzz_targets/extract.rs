#![no_main]

use libfuzzer_sys::fuzz_target;
use std::sync::OnceLock;

use teamtrace::semantics::{extract_from_text, match_structures};
use teamtrace::Lexicons;

static LEX: OnceLock<Lexicons> = OnceLock::new();

fuzz_target!(|text: &str| {
    let lex = LEX.get_or_init(Lexicons::embedded);
    let s = extract_from_text(text, &lex.extraction);
    assert!(match_structures(&s, &s, &lex.synonyms).score.is_one());
});
