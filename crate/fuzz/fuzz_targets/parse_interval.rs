#![no_main]
use libfuzzer_sys::fuzz_target;
use tdlek::Interval;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(iv) = text.parse::<Interval>() {
        assert_eq!(iv.to_string().parse::<Interval>().ok(), Some(iv));
    }
});
