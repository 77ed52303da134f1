#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiscord::DensityOperator;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Anything accepted must survive a write/read cycle.
    if let Ok(rho) = DensityOperator::from_json_str(text) {
        let again = DensityOperator::from_json_str(&rho.to_json_string()).expect("roundtrip");
        assert_eq!(again.layout(), rho.layout());
    }
});
