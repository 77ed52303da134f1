#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiscord::{Expression, MeasurementFamily};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = text.parse::<MeasurementFamily>() {
        assert_eq!(f.to_string().parse::<MeasurementFamily>().ok(), Some(f));
    }
    if let Ok(e) = text.parse::<Expression>() {
        assert_eq!(e.to_string(), text);
    }
});
