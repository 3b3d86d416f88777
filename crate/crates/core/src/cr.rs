//! Cyclic reduction for `A1 X^2 + A0 X + A-1 = 0` (minimal solution `G`) and
//! `X^2 A-1 + X A0 + A1 = 0` (solution `R`) with quasi-Toeplitz blocks, plus
//! the pointwise recurrence on the symbols.
//!
//! One step with `S = A0^-1`:
//!
//! ```text
//! A0'  = A0 - A1 S A-1 - A-1 S A1     A1'  = -A1 S A1     A-1' = -A-1 S A-1
//! At'  = At - A-1 S A1                Ah'  = Ah - A1 S A-1
//! ```
//!
//! and `G = -Ah^-1 A-1`, `R = -A1 Ah^-1` with the original `A-1`, `A1`.
//! Eliminating the odd unknowns of either equation updates the first block
//! row by `A1 S A-1`, so both limits go through `Ah`; `At` only matters for
//! the reversed equations and agrees with `Ah` on symbols.

use num_complex::Complex64;

use crate::cqt::CqtMatrix;
use crate::error::{CqtError, Result};
use crate::fft;
use crate::scalar::Scalar;
use crate::symbol::LaurentSymbol;

/// Default stopping tolerance of [`solve_g`] and [`solve_r`].
pub const DEFAULT_CR_TOL: f64 = 1e-12;

/// Step cap for [`scalar_cr`]; quadratic convergence needs far fewer.
const SCALAR_MAX_STEPS: usize = 128;

#[derive(Clone, Debug)]
pub struct CrState<T: Scalar = f64> {
    pub am1: CqtMatrix<T>,
    pub a0: CqtMatrix<T>,
    pub a1: CqtMatrix<T>,
    pub atilde: CqtMatrix<T>,
    pub ahat: CqtMatrix<T>,
    pub h: usize,
}

impl<T: Scalar> CrState<T> {
    pub fn new(am1: &CqtMatrix<T>, a0: &CqtMatrix<T>, a1: &CqtMatrix<T>) -> Self {
        Self {
            am1: am1.clone(),
            a0: a0.clone(),
            a1: a1.clone(),
            atilde: a0.clone(),
            ahat: a0.clone(),
            h: 0,
        }
    }

    fn breakdown(&self, source: CqtError) -> CqtError {
        CqtError::Breakdown {
            step: self.h,
            am1_norm: self.am1.qt_norm(),
            a0_norm: self.a0.qt_norm(),
            a1_norm: self.a1.qt_norm(),
            source: Box::new(source),
        }
    }

    /// `G(h) = -Ah(h)^-1 A-1`.
    pub fn g(&self, am1: &CqtMatrix<T>) -> Result<CqtMatrix<T>> {
        let inv = self.ahat.inv().map_err(|e| self.breakdown(e))?;
        Ok(-&(&inv * am1))
    }

    /// `R(h) = -A1 Ah(h)^-1`.
    pub fn r(&self, a1: &CqtMatrix<T>) -> Result<CqtMatrix<T>> {
        let inv = self.ahat.inv().map_err(|e| self.breakdown(e))?;
        Ok(-&(a1 * &inv))
    }
}

pub fn cr_step<T: Scalar>(s: &CrState<T>) -> Result<CrState<T>> {
    let inv = s.a0.inv().map_err(|e| s.breakdown(e))?;
    let a1s = &s.a1 * &inv;
    let am1s = &s.am1 * &inv;
    let p = &a1s * &s.am1;
    let q = &am1s * &s.a1;
    Ok(CrState {
        a0: &(&s.a0 - &p) - &q,
        a1: -&(&a1s * &s.a1),
        am1: -&(&am1s * &s.am1),
        atilde: &s.atilde - &q,
        ahat: &s.ahat - &p,
        h: s.h + 1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `A1 X^2 + A0 X + A-1`
    Left,
    /// `X^2 A-1 + X A0 + A1`
    Right,
}

#[derive(Clone, Debug)]
pub struct QuadraticSolveReport<T: Scalar = f64> {
    /// `G`, or `R` from [`solve_r`].
    pub solution: CqtMatrix<T>,
    pub iterations: usize,
    pub residual_inf: f64,
    pub residual_cqt: f64,
    /// `n- + n+ + 1` of the solution's symbol.
    pub band: usize,
    /// Nonzero rows of the correction's `F` factor.
    pub corr_rows: usize,
    /// Nonzero rows of the correction's `G` factor.
    pub corr_cols: usize,
    pub corr_rank: usize,
}

pub fn solve_g<T: Scalar>(
    am1: &CqtMatrix<T>,
    a0: &CqtMatrix<T>,
    a1: &CqtMatrix<T>,
    tol: f64,
    max_iter: usize,
) -> Result<QuadraticSolveReport<T>> {
    solve(am1, a0, a1, tol, max_iter, Side::Left)
}

pub fn solve_r<T: Scalar>(
    am1: &CqtMatrix<T>,
    a0: &CqtMatrix<T>,
    a1: &CqtMatrix<T>,
    tol: f64,
    max_iter: usize,
) -> Result<QuadraticSolveReport<T>> {
    solve(am1, a0, a1, tol, max_iter, Side::Right)
}

fn solve<T: Scalar>(
    am1: &CqtMatrix<T>,
    a0: &CqtMatrix<T>,
    a1: &CqtMatrix<T>,
    tol: f64,
    max_iter: usize,
    side: Side,
) -> Result<QuadraticSolveReport<T>> {
    let mut state = CrState::new(am1, a0, a1);
    let mut prev: Option<CqtMatrix<T>> = None;
    while state.h < max_iter {
        state = cr_step(&state)?;
        let settled = state.a1.qt_norm() * state.am1.qt_norm() < tol;
        if !settled && state.h < 2 {
            continue;
        }
        let x = match side {
            Side::Left => state.g(am1)?,
            Side::Right => state.r(a1)?,
        };
        let stalled = prev.as_ref().is_some_and(|p| (&x - p).qt_norm() < tol);
        if settled || stalled {
            return Ok(report(am1, a0, a1, x, state.h, side));
        }
        prev = Some(x);
    }
    Err(CqtError::MaxIterations(max_iter))
}

fn report<T: Scalar>(
    am1: &CqtMatrix<T>,
    a0: &CqtMatrix<T>,
    a1: &CqtMatrix<T>,
    x: CqtMatrix<T>,
    iterations: usize,
    side: Side,
) -> QuadraticSolveReport<T> {
    let (residual_inf, residual_cqt) = residual(am1, a0, a1, &x, side);
    let nonzero_rows = |m: &nalgebra::DMatrix<T>| m.row_iter().filter(|r| r.iter().any(|x| !x.is_zero())).count();
    let corr = x.correction();
    QuadraticSolveReport {
        band: x.symbol().band(),
        corr_rows: nonzero_rows(corr.f()),
        corr_cols: nonzero_rows(corr.g()),
        corr_rank: corr.rank(),
        solution: x,
        iterations,
        residual_inf,
        residual_cqt,
    }
}

/// `(||E||_inf estimate, ||E||_CQT)` for the residual `E` of the chosen equation.
pub fn residual<T: Scalar>(
    am1: &CqtMatrix<T>,
    a0: &CqtMatrix<T>,
    a1: &CqtMatrix<T>,
    x: &CqtMatrix<T>,
    side: Side,
) -> (f64, f64) {
    let x2 = x * x;
    let e = match side {
        Side::Left => &(&(a1 * &x2) + &(a0 * x)) + am1,
        Side::Right => &(&(&x2 * am1) + &(x * a0)) + a1,
    };
    (e.inf_norm_estimate(), e.cqt_norm())
}

/// Values of the scalar iterates on an `n`-point Fourier grid.
#[derive(Clone, Debug)]
pub struct ScalarCrState {
    pub am1: Vec<Complex64>,
    pub a0: Vec<Complex64>,
    pub a1: Vec<Complex64>,
    /// Shared by `At` and `Ah`: the two recurrences agree on symbols.
    pub atilde: Vec<Complex64>,
    pub h: usize,
}

impl ScalarCrState {
    pub fn new<T: Scalar>(
        am1: &LaurentSymbol<T>,
        a0: &LaurentSymbol<T>,
        a1: &LaurentSymbol<T>,
        n: usize,
    ) -> Result<Self> {
        let a0v = a0.evaluate_fourier(n)?;
        Ok(Self {
            am1: am1.evaluate_fourier(n)?,
            a1: a1.evaluate_fourier(n)?,
            atilde: a0v.clone(),
            a0: a0v,
            h: 0,
        })
    }

    pub fn step(&self) -> Self {
        let n = self.a0.len();
        let mut next = Self {
            am1: Vec::with_capacity(n),
            a0: Vec::with_capacity(n),
            a1: Vec::with_capacity(n),
            atilde: Vec::with_capacity(n),
            h: self.h + 1,
        };
        for j in 0..n {
            let (m, d, p) = (self.am1[j], self.a0[j], self.a1[j]);
            let cross = p * m / d;
            next.a0.push(d - 2.0 * cross);
            next.a1.push(-p * p / d);
            next.am1.push(-m * m / d);
            next.atilde.push(self.atilde[j] - cross);
        }
        next
    }

    /// `g(h)(z) = -a-1(z) / at(h)(z)` with the original `a-1`.
    pub fn g(&self, am1: &[Complex64]) -> Vec<Complex64> {
        am1.iter().zip(&self.atilde).map(|(m, t)| -m / t).collect()
    }

    /// Pointwise `|a1 a-1 / at^2|`.
    pub fn gaps(&self) -> Vec<f64> {
        (0..self.a0.len())
            .map(|j| (self.a1[j] * self.am1[j] / (self.atilde[j] * self.atilde[j])).norm())
            .collect()
    }

    /// Interpolates iterate values back to a symbol with `n_minus`/`n_plus` terms.
    pub fn interpolate(values: &[Complex64], n_minus: usize, n_plus: usize) -> LaurentSymbol<Complex64> {
        let c = fft::interpolate(values);
        let n = values.len();
        let neg = (0..=n_minus).map(|k| c[fft::wrap(-(k as isize), n)]).collect();
        let pos = (0..=n_plus).map(|k| c[k]).collect();
        LaurentSymbol::new(neg, pos).expect("shared constant term")
    }
}

/// Samples of `g(z)` on the `n`-point Fourier grid, iterating the pointwise
/// recurrence until `|a1 a-1 / at^2| < tol` everywhere.
pub fn scalar_cr<T: Scalar>(
    am1: &LaurentSymbol<T>,
    a0: &LaurentSymbol<T>,
    a1: &LaurentSymbol<T>,
    n: usize,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let mut s = ScalarCrState::new(am1, a0, a1, n)?;
    let am1v = s.am1.clone();
    loop {
        let gaps = s.gaps();
        let (worst, gap) = gaps
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bg), (i, &g)| if g.is_nan() || g > bg { (i, g) } else { (bi, bg) });
        if gap < tol {
            return Ok(s.g(&am1v));
        }
        if gap.is_nan() || s.h >= SCALAR_MAX_STEPS {
            let z = fft::grid_point(worst, n);
            return Err(CqtError::ScalarNoConvergence { index: worst, z });
        }
        s = s.step();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::Correction;
    use nalgebra::DMatrix;

    fn c(x: f64) -> CqtMatrix {
        CqtMatrix::toeplitz(LaurentSymbol::constant(x))
    }

    fn sym(lowest: isize, c: &[f64]) -> LaurentSymbol {
        LaurentSymbol::from_coeffs(lowest, c)
    }

    #[test]
    fn scalar_step_matches_hand_values() {
        let s = cr_step(&CrState::new(&c(1.0), &c(-2.5), &c(1.0))).unwrap();
        let k = |m: &CqtMatrix| m.symbol().coeff(0);
        assert!((k(&s.a1) - 0.4).abs() < 1e-15);
        assert!((k(&s.am1) - 0.4).abs() < 1e-15);
        assert!((k(&s.a0) + 1.7).abs() < 1e-15);
        assert!((k(&s.atilde) + 2.1).abs() < 1e-15);
        assert!((k(&s.ahat) + 2.1).abs() < 1e-15);
        assert_eq!(s.h, 1);
    }

    #[test]
    fn vanishing_outer_blocks_are_fixed() {
        let a0 = CqtMatrix::toeplitz(sym(-1, &[1.0, -4.0, 1.0])).with_correction(Correction::unit(0, 0, 1.0));
        let s0 = CrState::new(&CqtMatrix::zero(), &a0, &CqtMatrix::zero());
        let s1 = cr_step(&s0).unwrap();
        assert_eq!(s1.h, 1);
        for (x, y) in [(&s1.a0, &s0.a0), (&s1.atilde, &s0.atilde), (&s1.ahat, &s0.ahat)] {
            assert!((x - y).qt_norm() < 1e-14);
        }
        assert_eq!(s1.a1.qt_norm(), 0.0);
        assert_eq!(s1.am1.qt_norm(), 0.0);
    }

    #[test]
    fn scalar_solutions() {
        let g = solve_g(&c(1.0), &c(-2.5), &c(1.0), DEFAULT_CR_TOL, 50).unwrap();
        assert!((g.solution.symbol().coeff(0) - 0.5).abs() < 1e-12);
        assert_eq!(g.solution.symbol().band(), 1);
        assert_eq!(g.corr_rank, 0);
        assert!(g.residual_inf < 1e-12);

        let r = solve_r(&c(1.0), &c(-2.5), &c(1.0), DEFAULT_CR_TOL, 50).unwrap();
        assert!((r.solution.symbol().coeff(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linear_equations_solve_in_one_step() {
        let k = CqtMatrix::toeplitz(sym(-1, &[0.2, 0.5, 0.1])).with_correction(Correction::unit(1, 0, 0.3));
        let minus_i = c(-1.0);
        let g = solve_g(&k, &minus_i, &CqtMatrix::zero(), DEFAULT_CR_TOL, 10).unwrap();
        assert_eq!(g.iterations, 1);
        assert!((&g.solution - &k).qt_norm() < 1e-14);

        let r = solve_r(&CqtMatrix::zero(), &minus_i, &k, DEFAULT_CR_TOL, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!((&r.solution - &k).qt_norm() < 1e-14);
    }

    #[test]
    fn residual_examples() {
        let (a, b) = (c(1.0), c(-2.5));
        let (ri, rc) = residual(&a, &b, &a, &c(0.5), Side::Left);
        assert!(ri < 1e-12 && rc < 1e-12);

        let am1 = CqtMatrix::toeplitz(sym(0, &[0.7, 0.2]));
        let a1 = CqtMatrix::toeplitz(sym(-1, &[0.1, 0.3]));
        let (ri, rc) = residual(&am1, &b, &a1, &CqtMatrix::zero(), Side::Left);
        assert!((ri - 0.9).abs() < 1e-15 && (rc - am1.cqt_norm()).abs() < 1e-15);
        let (ri, _) = residual(&am1, &b, &a1, &CqtMatrix::zero(), Side::Right);
        assert!((ri - 0.4).abs() < 1e-15);
        let (ri, _) = residual(&a, &b, &a, &c(0.3), Side::Left);
        assert!(ri > 0.1);
    }

    #[test]
    fn too_many_iterations() {
        assert_eq!(
            solve_g(&c(1.0), &c(-2.5), &c(1.0), 1e-300, 3).unwrap_err(),
            CqtError::MaxIterations(3)
        );
    }

    #[test]
    fn breakdown_reports_step_and_norms() {
        // the symbol 1 - z of A0 vanishes at z = 1
        let err = cr_step(&CrState::new(&c(1.0), &CqtMatrix::toeplitz(sym(0, &[1.0, -1.0])), &c(1.0))).unwrap_err();
        match err {
            CqtError::Breakdown { step, a0_norm, source, .. } => {
                assert_eq!(step, 0);
                assert_eq!(a0_norm, 2.0);
                assert!(matches!(*source, CqtError::SymbolVanishes { .. }));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn scalar_cr_examples() {
        let g = scalar_cr(&sym(0, &[1.0]), &sym(0, &[-2.5]), &sym(0, &[1.0]), 16, 1e-15).unwrap();
        assert!(g.iter().all(|v| (v - 0.5).norm() < 1e-14));

        let g = scalar_cr(&LaurentSymbol::<f64>::zero(), &sym(0, &[-2.5]), &sym(0, &[1.0]), 8, 1e-15).unwrap();
        assert!(g.iter().all(|v| v.norm() == 0.0));

        // a0 = 0 somewhere: the recurrence blows up there
        let err = scalar_cr(&sym(0, &[1.0]), &sym(0, &[0.0]), &sym(0, &[1.0]), 8, 1e-15).unwrap_err();
        assert!(matches!(err, CqtError::ScalarNoConvergence { .. }));
    }

    fn dense_cr_step(s: [&DMatrix<f64>; 5]) -> [DMatrix<f64>; 5] {
        let [am1, a0, a1, at, ah] = s;
        let inv = a0.clone().try_inverse().unwrap();
        let p = a1 * &inv * am1;
        let q = am1 * &inv * a1;
        [-(am1 * &inv * am1), a0 - &p - &q, -(a1 * &inv * a1), at - q, ah - p]
    }

    #[test]
    fn matches_dense_cr_on_sections() {
        let am1 = CqtMatrix::toeplitz(sym(0, &[1.0, 0.5])).with_correction(Correction::unit(0, 1, 0.2));
        let a0 = CqtMatrix::toeplitz(sym(-1, &[0.6, -4.0, 0.4])).with_correction(Correction::unit(0, 0, 0.7));
        let a1 = CqtMatrix::toeplitz(sym(-1, &[0.3, 0.8]));
        let (n, m) = (240, 32);
        let mut dense = [&am1, &a0, &a1, &a0, &a0].map(|x| x.finite_section(n));
        let mut s = CrState::new(&am1, &a0, &a1);
        for _ in 0..3 {
            s = cr_step(&s).unwrap();
            dense = dense_cr_step([&dense[0], &dense[1], &dense[2], &dense[3], &dense[4]]);
            for (x, d) in [&s.am1, &s.a0, &s.a1, &s.atilde, &s.ahat].iter().zip(&dense) {
                let diff = x.finite_section(m) - d.view((0, 0), (m, m));
                assert!(diff.amax() < 1e-8, "{}", diff.amax());
            }
        }
        let g = s.g(&am1).unwrap();
        let gd = -(dense[4].clone().try_inverse().unwrap() * am1.finite_section(n));
        assert!((g.finite_section(m) - gd.view((0, 0), (m, m))).amax() < 1e-8);
    }

    #[test]
    fn noncommuting_blocks_are_solved() {
        // upper and lower bidiagonal outer blocks do not commute
        let am1 = CqtMatrix::toeplitz(sym(0, &[3.0, 3.0]));
        let a0 = CqtMatrix::toeplitz(sym(-1, &[2.5, -13.5, 2.0])).with_correction(Correction::unit(0, 0, 5.0));
        let a1 = CqtMatrix::toeplitz(sym(-1, &[2.5, 0.5]));
        let g = solve_g(&am1, &a0, &a1, DEFAULT_CR_TOL, 60).unwrap();
        assert!(g.residual_inf < 1e-10, "{}", g.residual_inf);
        let r = solve_r(&am1, &a0, &a1, DEFAULT_CR_TOL, 60).unwrap();
        assert!(r.residual_inf < 1e-10, "{}", r.residual_inf);
        let (n, m) = (300, 24);
        let (gs, a1s, a0s) = (g.solution.finite_section(n), a1.finite_section(n), a0.finite_section(n));
        let e = &a1s * &gs * &gs + &a0s * &gs + am1.finite_section(n);
        assert!(e.view((0, 0), (m, m)).amax() < 1e-10);
    }

    #[test]
    fn scalar_grid_tracks_symbols() {
        let am1 = CqtMatrix::toeplitz(sym(0, &[1.0, 0.5]));
        let a0 = CqtMatrix::toeplitz(sym(-1, &[0.6, -4.0, 0.4]));
        let a1 = CqtMatrix::toeplitz(sym(-1, &[0.3, 0.8]));
        let n = 256;
        let mut grid = ScalarCrState::new(am1.symbol(), a0.symbol(), a1.symbol(), n).unwrap();
        let mut s = CrState::new(&am1, &a0, &a1);
        for _ in 0..3 {
            s = cr_step(&s).unwrap();
            grid = grid.step();
        }
        for (m, v) in [(&s.a0, &grid.a0), (&s.atilde, &grid.atilde), (&s.ahat, &grid.atilde)] {
            let w = m.symbol().evaluate_fourier(n).unwrap();
            let dev = w.iter().zip(v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(dev < 1e-10, "{dev}");
        }
    }
}
