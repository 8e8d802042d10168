#![no_main]

use dampedq::scalar::parse_rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(q) = parse_rational(text) {
        assert_eq!(parse_rational(&q.to_string()), Some(q));
    }
});
