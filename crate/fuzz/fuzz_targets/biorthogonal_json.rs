#![no_main]

use dampedq::pseudoq::BiorthogonalSystem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = BiorthogonalSystem::from_json(text) {
        let again = BiorthogonalSystem::from_json(&sys.to_json()).expect("serialized form re-parses");
        assert_eq!((again.dim(), again.len()), (sys.dim(), sys.len()));
        let _ = sys.biorthonormality_residual();
    }
});
