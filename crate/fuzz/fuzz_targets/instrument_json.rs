#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiscord::KrausInstrument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = KrausInstrument::from_json_str(text) {
        let again = KrausInstrument::from_json_str(&inst.to_json_string()).expect("roundtrip");
        assert_eq!(again.kraus_counts(), inst.kraus_counts());
        let _ = inst.classify();
    }
});
