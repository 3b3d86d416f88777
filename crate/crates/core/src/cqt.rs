//! Semi-infinite quasi-Toeplitz matrices `A = T(a) + E` and their algebra.
//!
//! Every operation returns a truncated representation: the symbol is cut by
//! tail norm and the correction is recompressed with the matrix tolerance.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::correction::{concat_all, pad_rows, toeplitz_apply, Correction};
use crate::error::{CqtError, Result};
use crate::factorization::{reciprocal_minus, reciprocal_plus, wiener_hopf};
use crate::scalar::Scalar;
use crate::symbol::LaurentSymbol;

pub const DEFAULT_TOL: f64 = 1e-15;

/// A pivot of the capacitance matrix below this fraction of its scale
/// makes the matrix singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-12;

/// Extra rows beyond the correction and lower band used by
/// [`CqtMatrix::inf_norm_estimate`].
const INF_NORM_MARGIN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct CqtMatrix<T: Scalar = f64> {
    symbol: LaurentSymbol<T>,
    corr: Correction<T>,
    tol: f64,
}

impl<T: Scalar> CqtMatrix<T> {
    pub fn new(symbol: LaurentSymbol<T>, corr: Correction<T>, tol: f64) -> Self {
        Self { symbol, corr, tol }
    }

    pub fn toeplitz(symbol: LaurentSymbol<T>) -> Self {
        Self::new(symbol, Correction::zero(), DEFAULT_TOL)
    }

    pub fn identity() -> Self {
        Self::toeplitz(LaurentSymbol::one())
    }

    pub fn zero() -> Self {
        Self::toeplitz(LaurentSymbol::zero())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_correction(mut self, corr: Correction<T>) -> Self {
        self.corr = corr;
        self
    }

    pub fn symbol(&self) -> &LaurentSymbol<T> {
        &self.symbol
    }

    pub fn correction(&self) -> &Correction<T> {
        &self.corr
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `||a||_W + ||E||_F`.
    pub fn qt_norm(&self) -> f64 {
        self.symbol.w_norm() + self.corr.f_norm()
    }

    /// `||a||_W1 + ||E||_F`.
    pub fn cqt_norm(&self) -> f64 {
        self.symbol.w1_norm() + self.corr.f_norm()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.symbol.scale(s), self.corr.scale(s), self.tol)
    }

    /// `A^T`, which is `T(a(1/z)) + G F^T`.
    pub fn transpose(&self) -> Self {
        Self::new(self.symbol.reversed(), self.corr.transpose(), self.tol)
    }

    /// Leading `rows x cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> DMatrix<T> {
        let mut out = self.corr.dense(rows, cols);
        let (nm, np) = (self.symbol.n_minus() as isize, self.symbol.n_plus() as isize);
        for i in 0..rows as isize {
            let lo = (i - nm).max(0);
            let hi = (i + np).min(cols as isize - 1);
            for j in lo..=hi {
                out[(i as usize, j as usize)] += self.symbol.coeff(j - i);
            }
        }
        out
    }

    /// Leading `n x n` section.
    pub fn finite_section(&self, n: usize) -> DMatrix<T> {
        self.block(n, n)
    }

    /// Estimate of the infinity norm: exact row sums over the leading rows
    /// that can differ from the Toeplitz far field, then `||a||_W` for the
    /// remaining rows (each of which sums to at most that).
    pub fn inf_norm_estimate(&self) -> f64 {
        let rows = self.corr.rows() + self.symbol.n_minus() + INF_NORM_MARGIN;
        let cols = (rows + self.symbol.n_plus()).max(self.corr.cols());
        let b = self.block(rows, cols);
        let head = b
            .row_iter()
            .map(|r| r.iter().map(|x| x.modulus()).sum::<f64>())
            .fold(0.0, f64::max);
        head.max(self.symbol.w_norm())
    }

    fn finish(symbol: LaurentSymbol<T>, parts: &[&Correction<T>], tol: f64) -> Self {
        let joined = concat_all(parts);
        let scale = joined.f().norm() * joined.g().norm();
        let corr = joined.compress_with_floor(tol, tol * scale);
        Self::new(symbol, corr, tol)
    }

    /// Inverse through the Wiener-Hopf factorization `a = u l` of the symbol
    /// and a Woodbury update for the correction.
    pub fn inv(&self) -> Result<Self> {
        let tol = self.tol;
        let wh = wiener_hopf(&self.symbol, tol)?;
        let u_inv = reciprocal_plus(&wh.u, tol)?;
        let l_inv = reciprocal_minus(&wh.l, tol)?;
        // T(a)^-1 = T(1/l) T(1/u) = T(1/a) - H((1/l)-) H((1/u)+)
        let c = (&l_inv * &u_inv).truncate(tol);
        let h = hankel_product_factors(&l_inv, &u_inv, tol).scale(-T::one());
        if self.corr.is_zero() {
            return Ok(Self::finish(c, &[&h], tol));
        }

        let (fa, ga) = (self.corr.f(), self.corr.g());
        // T(1/u) is upper and T(1/l)^T = T(1/l(1/z)) is upper triangular:
        // both keep the row support of the factors
        let f1 = toeplitz_apply(&u_inv, fa, fa.nrows());
        let g1 = toeplitz_apply(&l_inv.reversed(), ga, ga.nrows());
        let rows = f1.nrows().max(g1.nrows());
        let cap = pad_rows(&g1, rows).transpose() * pad_rows(&f1, rows);
        let k = cap.nrows();
        let scale = 1.0 + cap.iter().fold(0.0f64, |m, x| m.max(x.modulus()));
        let y = DMatrix::<T>::identity(k, k) + cap;
        let lu = y.lu();
        let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.modulus()));
        if pivot.is_nan() || pivot <= SINGULAR_PIVOT_REL * scale {
            return Err(CqtError::SingularCapacitance { pivot });
        }
        let y_inv = lu.try_inverse().ok_or(CqtError::SingularCapacitance { pivot })?;
        let f2 = f1 * y_inv;
        let f3 = toeplitz_apply(&l_inv, &f2, f2.nrows() + l_inv.n_minus());
        let g2 = toeplitz_apply(&u_inv.reversed(), &g1, g1.nrows() + u_inv.n_plus());
        let woodbury = Correction::new(-f3, g2)?;
        Ok(Self::finish(c, &[&h, &woodbury], tol))
    }
}

/// Factors of `H(a-) H(b+)`, built from the finite Hankel blocks of the
/// negative-power part of `a` and the positive-power part of `b`.
pub fn hankel_product_factors<T: Scalar>(
    a: &LaurentSymbol<T>,
    b: &LaurentSymbol<T>,
    eps: f64,
) -> Correction<T> {
    let (am, bp) = (a.minus_tail(), b.plus_tail());
    let mut m = am.len().min(bp.len());
    if m == 0 {
        return Correction::zero();
    }
    // column j of each Hankel factor is the tail from index j: drop the
    // trailing columns whose products together stay below eps
    let tails = |c: &[T]| {
        let mut acc = 0.0;
        let mut t: Vec<f64> = c.iter().rev().map(|x| {
            acc += x.modulus_squared();
            acc.sqrt()
        }).collect();
        t.reverse();
        t
    };
    let (ta, tb) = (tails(am), tails(bp));
    let budget = eps * ta[0] * tb[0];
    let mut dropped = 0.0;
    while m > 1 && dropped + ta[m - 1] * tb[m - 1] <= budget {
        dropped += ta[m - 1] * tb[m - 1];
        m -= 1;
    }
    let hankel = |c: &[T], cols: usize| {
        DMatrix::from_fn(c.len(), cols, |i, j| c.get(i + j).copied().unwrap_or_else(T::zero))
    };
    // H(b+) is symmetric, so its leading rows transposed are its leading columns
    Correction::new(hankel(am, m), hankel(bp, m))
        .expect("hankel factors share their column count")
        .compress(eps)
}

impl<T: Scalar> Add for &CqtMatrix<T> {
    type Output = CqtMatrix<T>;

    fn add(self, rhs: Self) -> CqtMatrix<T> {
        let tol = self.tol.max(rhs.tol);
        let c = (&self.symbol + &rhs.symbol).truncate(tol);
        CqtMatrix::finish(c, &[&self.corr, &rhs.corr], tol)
    }
}

impl<T: Scalar> Sub for &CqtMatrix<T> {
    type Output = CqtMatrix<T>;

    fn sub(self, rhs: Self) -> CqtMatrix<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Neg for &CqtMatrix<T> {
    type Output = CqtMatrix<T>;

    fn neg(self) -> CqtMatrix<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for &CqtMatrix<T> {
    type Output = CqtMatrix<T>;

    fn mul(self, rhs: Self) -> CqtMatrix<T> {
        let tol = self.tol.max(rhs.tol);
        let (a, b) = (&self.symbol, &rhs.symbol);
        let c = (a * b).truncate(tol);
        // T(a) T(b) = T(ab) - H(a-) H(b+)
        let h = hankel_product_factors(a, b, tol).scale(-T::one());

        // T(a) E_b = (T(a) F_b) G_b^T
        let left = if rhs.corr.is_zero() {
            Correction::zero()
        } else {
            let fb = rhs.corr.f();
            let f = toeplitz_apply(a, fb, fb.nrows() + a.n_minus());
            Correction::new(f, rhs.corr.g().clone()).expect("same rank")
        };

        // E_a T(b) + E_a E_b = F_a (T(b)^T G_a + G_b F_b^T G_a)^T
        let right = if self.corr.is_zero() {
            Correction::zero()
        } else {
            let ga = self.corr.g();
            let mut g = toeplitz_apply(&b.reversed(), ga, ga.nrows() + b.n_plus());
            if !rhs.corr.is_zero() {
                let (fb, gb) = (rhs.corr.f(), rhs.corr.g());
                let common = fb.nrows().max(ga.nrows());
                let inner = pad_rows(fb, common).transpose() * pad_rows(ga, common);
                let extra = gb * inner;
                let rows = g.nrows().max(extra.nrows());
                g = pad_rows(&g, rows) + pad_rows(&extra, rows);
            }
            Correction::new(self.corr.f().clone(), g).expect("same rank")
        };
        CqtMatrix::finish(c, &[&h, &left, &right], tol)
    }
}
