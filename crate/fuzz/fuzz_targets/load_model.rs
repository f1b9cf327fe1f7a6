#![no_main]
use libfuzzer_sys::fuzz_target;
use tdlek::TLekModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = TLekModel::load(text) {
        assert_eq!(TLekModel::load(&m.save()).ok(), Some(m));
    }
});
