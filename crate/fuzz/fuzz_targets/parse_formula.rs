#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // printed form must read back as the same tree
    if let Ok(f) = tdlek::parse(text) {
        assert_eq!(tdlek::parse(&f.to_string()).ok(), Some(f));
    }
});
