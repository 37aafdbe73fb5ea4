#![no_main]

use libfuzzer_sys::fuzz_target;
use smc_repetition::io::parse_node_weights;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_node_weights(s);
    }
});
