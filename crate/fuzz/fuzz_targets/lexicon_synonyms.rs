#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::lexicon::SynonymLexicon;

fuzz_target!(|text: &str| {
    let _ = SynonymLexicon::parse(text);
});
