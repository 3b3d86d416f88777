#![no_main]

use cqt_core::parse_params;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_params(text) {
        // anything accepted must already satisfy the domain checks
        assert!(p.validate().is_ok());
    }
});
