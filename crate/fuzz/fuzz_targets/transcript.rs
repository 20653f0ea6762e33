#![no_main]

use libfuzzer_sys::fuzz_target;
use teamtrace::transcript::{parse_transcript, serialize_transcript};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = parse_transcript(data) {
        let again = parse_transcript(serialize_transcript(&t).as_bytes()).expect("serialized transcripts reparse");
        assert_eq!(again, t);
    }
});
