#![no_main]

use dampedq::hamiltonian::CanonicalMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CanonicalMap::from_json(text) {
        let again = CanonicalMap::from_json(&t.to_json()).expect("serialized form re-parses");
        assert_eq!(again.n(), t.n());
        let _ = t.symplectic_residual();
        let _ = t.inverse();
    }
});
