#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::fixtures::ProvenanceTable;

fuzz_target!(|text: &str| {
    let _ = ProvenanceTable::parse(text);
});
