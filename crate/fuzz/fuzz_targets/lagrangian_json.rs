#![no_main]

use dampedq::solder::QuadraticLagrangian;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(l) = QuadraticLagrangian::from_json(text) {
        let again = QuadraticLagrangian::from_json(&l.to_json()).expect("serialized form re-parses");
        assert_eq!(again, l);
    }
});
