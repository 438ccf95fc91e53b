#![no_main]

use libfuzzer_sys::fuzz_target;
use mobius_sense::HomMatrixPolynomial;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing must never panic; accepted documents must round-trip.
    if let Ok(p) = HomMatrixPolynomial::from_json_str(text) {
        let round = HomMatrixPolynomial::from_json_str(&p.to_json_string())
            .expect("serialized polynomial re-parses");
        assert_eq!(p, round);
    }
});
