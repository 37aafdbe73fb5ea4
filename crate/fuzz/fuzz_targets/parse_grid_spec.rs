#![no_main]

use libfuzzer_sys::fuzz_target;
use smc_repetition::io::parse_grid_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_grid_spec(s);
    }
});
