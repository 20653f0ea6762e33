#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::lexicon::LemmaTable;

fuzz_target!(|text: &str| {
    let _ = LemmaTable::parse(text);
});
