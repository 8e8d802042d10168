#![no_main]

use clap::Parser;
use dampedq::cli::{merge_config, Cli};
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; the run itself is not executed.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("dampedq").chain(text.split('\0'));
    let Ok(cli) = Cli::try_parse_from(args) else { return };
    if cli.config.is_some() {
        return;
    }
    if let Ok(cfg) = merge_config(cli, None, None) {
        let _ = cfg.validate();
    }
});
