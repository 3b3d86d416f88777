#![no_main]

use cqt_core::{parse_correction, Correction};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // header sizes are capped, so a short input cannot force a huge allocation
        let _: Result<Correction<f64>, _> = parse_correction(text);
    }
});
