#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::lexicon::ExtractionLexicon;

fuzz_target!(|text: &str| {
    let _ = ExtractionLexicon::parse(text);
});
