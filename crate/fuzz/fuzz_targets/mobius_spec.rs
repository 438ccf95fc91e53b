#![no_main]

use libfuzzer_sys::fuzz_target;
use mobius_sense::Mobius2x2;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = Mobius2x2::from_spec(text) {
        // Accepted matrices are invertible and survive a JSON round trip.
        assert!(m.det().norm() > 0.0);
        let round = Mobius2x2::from_spec(&m.to_json_string()).expect("serialized matrix re-parses");
        assert_eq!(m.entries(), round.entries());
    }
});
