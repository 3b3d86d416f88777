//! Evaluation and interpolation at the N-th roots of unity.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values `sum_k c_k w^(jk)` for `j = 0..n`, `w = exp(2 pi i / n)`, where
/// `coeffs[t]` is the coefficient of `z^(lowest + t)`. Wraps cyclically.
pub(crate) fn evaluate(lowest: isize, coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (t, c) in coeffs.iter().enumerate() {
        buf[wrap(lowest + t as isize, n)] += c;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf
}

/// Inverse of [`evaluate`]: entry `k` of the output is the coefficient of
/// `z^k` (indices taken mod `n`).
pub(crate) fn interpolate(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

pub(crate) fn wrap(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

pub(crate) fn grid_point(j: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64)
}
