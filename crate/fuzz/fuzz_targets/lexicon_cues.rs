#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::lexicon::CueLexicon;

fuzz_target!(|text: &str| {
    let _ = CueLexicon::parse(text);
});
