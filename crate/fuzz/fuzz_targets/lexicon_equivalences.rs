#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::lexicon::OperationEquivalenceTable;

fuzz_target!(|text: &str| {
    let _ = OperationEquivalenceTable::parse(text);
});
