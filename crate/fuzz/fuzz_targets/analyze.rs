#![no_main]

use libfuzzer_sys::fuzz_target;
use std::sync::OnceLock;

use teamtrace::{analyze, parse_transcript, Config, Lexicons};

static LEX: OnceLock<Lexicons> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = parse_transcript(data) {
        if t.utterances.len() <= 64 {
            let a = analyze(&t, LEX.get_or_init(Lexicons::embedded), &Config::default());
            let _ = a.graph.to_dot();
        }
    }
});
