#![no_main]

use cqt_core::{parse_matrix, CqtMatrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_matrix::<f64>(text) {
            assert!(m.tol() > 0.0 && m.tol().is_finite());
            let _: CqtMatrix = m;
        }
    }
});
