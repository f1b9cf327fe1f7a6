#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(stmts) = tdlek::scenario::parse_scenario(text) {
        // bounded so looping rule sets stay cheap
        if stmts.len() <= 32 {
            let _ = tdlek::scenario::run_statements(&stmts);
        }
    }
});
