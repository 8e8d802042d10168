#![no_main]

use dampedq::hamiltonian::QuadraticHamiltonian;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = QuadraticHamiltonian::from_json(text) {
        let again = QuadraticHamiltonian::from_json(&h.to_json()).expect("serialized form re-parses");
        assert_eq!(again.n(), h.n());
    }
});
