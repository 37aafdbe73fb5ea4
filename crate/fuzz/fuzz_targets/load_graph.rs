#![no_main]

use libfuzzer_sys::fuzz_target;
use smc_repetition::io::load_graph;

// Edge list and node weights separated by a NUL byte.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = match s.split_once('\0') {
        Some((edges, weights)) => load_graph(edges, Some(weights)),
        None => load_graph(s, None),
    };
});
