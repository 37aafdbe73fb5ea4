#![no_main]

use libfuzzer_sys::fuzz_target;
use smc_repetition_cli::config::{parse_config_text, ExperimentConfig, Overrides};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_config_text(s);
        let overrides = Overrides {
            out: Some("out".into()),
            ..Default::default()
        };
        if let Ok(c) = ExperimentConfig::resolve(None, Some(s), &overrides) {
            let _ = c.canonical_text();
        }
    }
});
