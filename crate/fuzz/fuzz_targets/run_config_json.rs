#![no_main]

use dampedq::cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        let again = RunConfig::from_json(&cfg.to_json()).expect("serialized form re-parses");
        assert_eq!(again.command, cfg.command);
        let _ = cfg.validate();
    }
});
