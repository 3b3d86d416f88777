#![no_main]

use cqt_core::{parse_matrix, write_matrix, CqtMatrix};
use libfuzzer_sys::fuzz_target;

// parse -> write -> parse must be a fixed point
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(first) = parse_matrix::<f64>(text) else {
        return;
    };
    let written = write_matrix(&first);
    let second: CqtMatrix = parse_matrix(&written).expect("written matrix parses");
    assert_eq!(first, second);
    assert_eq!(written, write_matrix(&second));
});
