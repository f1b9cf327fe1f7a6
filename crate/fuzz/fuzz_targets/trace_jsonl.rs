#![no_main]
use libfuzzer_sys::fuzz_target;
use tdlek::agent::{init, replay, trace_from_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(events) = trace_from_jsonl(text) {
        let _ = replay(&init(Vec::new()), &events);
    }
});
