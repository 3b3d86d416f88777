#![no_main]

use cqt_core::{parse_symbol, LaurentSymbol};
use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _: Result<LaurentSymbol<f64>, _> = parse_symbol(text);
    let _: Result<LaurentSymbol<Complex64>, _> = parse_symbol(text);
});
