//! Finitely supported Laurent symbols `a(z) = sum_{i=-n-}^{n+} a_i z^i`.
//!
//! Coefficients live in two vectors sharing the constant term:
//! `neg = (a_0, a_-1, ..., a_-n-)` and `pos = (a_0, a_1, ..., a_n+)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{CqtError, Result};
use crate::fft;
use crate::scalar::Scalar;

/// Initial grid for winding-number estimation.
pub const WINDING_START_GRID: usize = 256;
/// Largest grid any evaluation loop may reach.
pub const MAX_GRID: usize = 1 << 20;
/// `min |a(z)| <= VANISH_REL * ||a||_W` on the grid counts as vanishing.
pub const VANISH_REL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol<T: Scalar = f64> {
    neg: Vec<T>,
    pos: Vec<T>,
}

impl<T: Scalar> LaurentSymbol<T> {
    /// Builds a symbol from the two half sequences. Both must be non-empty and
    /// agree on the constant coefficient.
    pub fn new(neg: Vec<T>, pos: Vec<T>) -> Result<Self> {
        match (neg.first(), pos.first()) {
            (Some(a), Some(b)) if a == b => Ok(Self { neg, pos }),
            (Some(_), Some(_)) => Err(CqtError::Layout(
                "neg[0] and pos[0] must hold the same constant coefficient".into(),
            )),
            _ => Err(CqtError::Layout("coefficient vectors must be non-empty".into())),
        }
    }

    /// `coeffs[t]` is the coefficient of `z^(lowest + t)`. The support is
    /// widened to contain the constant term.
    pub fn from_coeffs(lowest: isize, coeffs: &[T]) -> Self {
        let highest = lowest + coeffs.len() as isize - 1;
        let n_minus = (-lowest).max(0) as usize;
        let n_plus = highest.max(0) as usize;
        let mut neg = vec![T::zero(); n_minus + 1];
        let mut pos = vec![T::zero(); n_plus + 1];
        for (t, &c) in coeffs.iter().enumerate() {
            let k = lowest + t as isize;
            if k <= 0 {
                neg[(-k) as usize] = c;
            }
            if k >= 0 {
                pos[k as usize] = c;
            }
        }
        Self { neg, pos }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self {
            neg: vec![c],
            pos: vec![c],
        }
    }

    /// `c z^k`.
    pub fn monomial(k: isize, c: T) -> Self {
        Self::from_coeffs(k, &[c])
    }

    pub fn neg(&self) -> &[T] {
        &self.neg
    }

    pub fn pos(&self) -> &[T] {
        &self.pos
    }

    pub fn n_minus(&self) -> usize {
        self.neg.len() - 1
    }

    pub fn n_plus(&self) -> usize {
        self.pos.len() - 1
    }

    /// Number of stored coefficients, `n- + n+ + 1`.
    pub fn band(&self) -> usize {
        self.neg.len() + self.pos.len() - 1
    }

    pub fn coeff(&self, k: isize) -> T {
        let v = if k < 0 {
            self.neg.get(k.unsigned_abs())
        } else {
            self.pos.get(k as usize)
        };
        v.copied().unwrap_or_else(T::zero)
    }

    /// Coefficients in ascending order of the power, with the power.
    pub fn terms(&self) -> impl Iterator<Item = (isize, T)> + '_ {
        let lo = -(self.n_minus() as isize);
        (lo..=self.n_plus() as isize).map(move |k| (k, self.coeff(k)))
    }

    pub fn is_zero(&self) -> bool {
        self.neg.iter().chain(&self.pos).all(|c| c.is_zero())
    }

    /// `a(1/z)`; the Toeplitz matrix of the result is the transpose of `T(a)`.
    pub fn reversed(&self) -> Self {
        Self {
            neg: self.pos.clone(),
            pos: self.neg.clone(),
        }
    }

    /// Coefficients `(a_1, a_2, ...)` of the power series `a+`.
    pub fn plus_tail(&self) -> &[T] {
        &self.pos[1..]
    }

    /// Coefficients `(a_-1, a_-2, ...)` of the power series `a-`.
    pub fn minus_tail(&self) -> &[T] {
        &self.neg[1..]
    }

    pub fn w_norm(&self) -> f64 {
        self.terms().map(|(_, c)| c.modulus()).sum()
    }

    /// `||a||_W + ||a'||_W`.
    pub fn w1_norm(&self) -> f64 {
        self.w_norm()
            + self
                .terms()
                .map(|(k, c)| k.unsigned_abs() as f64 * c.modulus())
                .sum::<f64>()
    }

    pub fn scale(&self, s: T) -> Self {
        let f = |v: &Vec<T>| v.iter().map(|&c| c * s).collect();
        Self {
            neg: f(&self.neg),
            pos: f(&self.pos),
        }
        .canonical()
    }

    /// Trims trailing coefficients that are negligible at working precision.
    pub fn canonical(mut self) -> Self {
        let thr = 1e-3 * f64::EPSILON * self.w_norm();
        for half in [&mut self.neg, &mut self.pos] {
            while half.len() > 1 && half.last().unwrap().modulus() <= thr {
                half.pop();
            }
        }
        self
    }

    /// Drops outer coefficients, smallest end first, while the discarded
    /// W-norm stays within `eps * max(1, ||a||_W)`. Interior coefficients are
    /// never touched.
    pub fn truncate(&self, eps: f64) -> Self {
        if eps <= 0.0 {
            return self.clone();
        }
        self.truncate_to_budget(eps * self.w_norm().max(1.0))
    }

    /// Like [`truncate`](Self::truncate) with an absolute W-norm budget.
    pub fn truncate_to_budget(&self, budget: f64) -> Self {
        if budget <= 0.0 {
            return self.clone();
        }
        let (mut nl, mut pl) = (self.neg.len(), self.pos.len());
        let mut dropped = 0.0;
        loop {
            let left = (nl > 1).then(|| self.neg[nl - 1].modulus());
            let right = (pl > 1).then(|| self.pos[pl - 1].modulus());
            let (take_left, m) = match (left, right) {
                (Some(l), Some(r)) if l <= r => (true, l),
                (Some(_), Some(r)) => (false, r),
                (Some(l), None) => (true, l),
                (None, Some(r)) => (false, r),
                (None, None) => break,
            };
            if dropped + m > budget {
                break;
            }
            dropped += m;
            if take_left {
                nl -= 1;
            } else {
                pl -= 1;
            }
        }
        Self {
            neg: self.neg[..nl].to_vec(),
            pos: self.pos[..pl].to_vec(),
        }
    }

    /// Values at the `n` Fourier points `w^j`, `w = exp(2 pi i / n)`.
    pub fn evaluate_fourier(&self, n: usize) -> Result<Vec<Complex64>> {
        if !n.is_power_of_two() {
            return Err(CqtError::GridNotPowerOfTwo(n));
        }
        if n < self.band() {
            return Err(CqtError::GridTooSmall {
                grid: n,
                support: self.band(),
            });
        }
        let coeffs: Vec<Complex64> = self.terms().map(|(_, c)| c.to_c64()).collect();
        Ok(fft::evaluate(-(self.n_minus() as isize), &coeffs, n))
    }

    /// Interpolates grid values and keeps the powers in `[-n_minus, n_plus]`.
    pub(crate) fn from_fourier(values: &[Complex64], n_minus: usize, n_plus: usize) -> Self {
        let n = values.len();
        let c = fft::interpolate(values);
        let neg = (0..=n_minus).map(|k| T::from_c64(c[fft::wrap(-(k as isize), n)])).collect();
        let pos = (0..=n_plus).map(|k| T::from_c64(c[k])).collect();
        Self { neg, pos }
    }

    /// Winding number of `a(T)` around the origin, from phase increments on
    /// a grid that starts at `n_start` points and doubles until two
    /// successive estimates agree.
    pub fn winding_number(&self, n_start: usize) -> Result<i64> {
        let norm = self.w_norm();
        let mut n = n_start.max(self.band()).next_power_of_two().max(4);
        let mut prev = None;
        loop {
            let v = self.evaluate_fourier(n)?;
            let min = v.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            if min <= VANISH_REL * norm || norm == 0.0 {
                return Err(CqtError::SymbolVanishes { min });
            }
            let total: f64 = (0..n).map(|j| (v[(j + 1) % n] / v[j]).arg()).sum();
            let w = (total / std::f64::consts::TAU).round() as i64;
            if prev == Some(w) {
                return Ok(w);
            }
            prev = Some(w);
            n *= 2;
            if n > MAX_GRID {
                return Err(CqtError::GridExhausted(MAX_GRID));
            }
        }
    }

    /// Minimum of `|a(z)|` on an `n`-point grid.
    pub fn grid_min_modulus(&self, n: usize) -> Result<f64> {
        let v = self.evaluate_fourier(n)?;
        Ok(v.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min))
    }

    fn from_fn(n_minus: usize, n_plus: usize, f: impl Fn(isize) -> T) -> Self {
        let neg = (0..=n_minus).map(|k| f(-(k as isize))).collect();
        let pos = (0..=n_plus).map(|k| f(k as isize)).collect();
        Self { neg, pos }
    }
}

impl<T: Scalar> Add for &LaurentSymbol<T> {
    type Output = LaurentSymbol<T>;

    fn add(self, rhs: Self) -> LaurentSymbol<T> {
        LaurentSymbol::from_fn(
            self.n_minus().max(rhs.n_minus()),
            self.n_plus().max(rhs.n_plus()),
            |k| self.coeff(k) + rhs.coeff(k),
        )
        .canonical()
    }
}

impl<T: Scalar> Sub for &LaurentSymbol<T> {
    type Output = LaurentSymbol<T>;

    fn sub(self, rhs: Self) -> LaurentSymbol<T> {
        LaurentSymbol::from_fn(
            self.n_minus().max(rhs.n_minus()),
            self.n_plus().max(rhs.n_plus()),
            |k| self.coeff(k) - rhs.coeff(k),
        )
        .canonical()
    }
}

impl<T: Scalar> Neg for &LaurentSymbol<T> {
    type Output = LaurentSymbol<T>;

    fn neg(self) -> LaurentSymbol<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for &LaurentSymbol<T> {
    type Output = LaurentSymbol<T>;

    fn mul(self, rhs: Self) -> LaurentSymbol<T> {
        let lo_a = -(self.n_minus() as isize);
        let lo_b = -(rhs.n_minus() as isize);
        let a: Vec<T> = self.terms().map(|(_, c)| c).collect();
        let b: Vec<T> = rhs.terms().map(|(_, c)| c).collect();
        let mut c = vec![T::zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        LaurentSymbol::from_coeffs(lo_a + lo_b, &c).canonical()
    }
}
