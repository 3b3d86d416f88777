//! Canonical Wiener-Hopf factorization `a(z) = u(z) l(z)` by cepstral
//! splitting, and reciprocals of the one-sided factors.
//!
//! `log a(z)` is sampled on a Fourier grid with continuous phase, its
//! coefficients are split into the power-series part (with the constant) and
//! the part in negative powers, and each part is exponentiated on the grid
//! and interpolated back. The grid doubles until the residual `|a - u l|`
//! reaches the requested tolerance or stops improving.

use num_complex::Complex64;

use crate::error::{CqtError, Result};
use crate::fft;
use crate::scalar::Scalar;
use crate::symbol::{LaurentSymbol, MAX_GRID, VANISH_REL, WINDING_START_GRID};

/// `u` is a power series in `z`, `l` a power series in `1/z` with `l_0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WhFactorization<T: Scalar = f64> {
    pub u: LaurentSymbol<T>,
    pub l: LaurentSymbol<T>,
    /// `||u l - a||_W` at the accepted grid.
    pub residual: f64,
}

fn start_grid(band: usize) -> usize {
    (4 * band).next_power_of_two().max(256)
}

fn check_nonvanishing(values: &[Complex64], norm: f64) -> Result<()> {
    let min = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if norm == 0.0 || min <= VANISH_REL * norm {
        return Err(CqtError::SymbolVanishes { min });
    }
    Ok(())
}

pub fn wiener_hopf<T: Scalar>(a: &LaurentSymbol<T>, eps: f64) -> Result<WhFactorization<T>> {
    let norm = a.w_norm();
    let kappa = a.winding_number(WINDING_START_GRID)?;
    if kappa != 0 {
        return Err(CqtError::NonzeroWinding(kappa));
    }
    let target = 10.0 * eps * norm;
    let mut n = start_grid(a.band());
    let mut best: Option<WhFactorization<T>> = None;
    while n <= MAX_GRID {
        let v = a.evaluate_fourier(n)?;
        check_nonvanishing(&v, norm)?;
        let cand = split_on_grid(a, &v, eps)?;
        if cand.residual <= target {
            return Ok(cand);
        }
        match best {
            // no gain from a finer grid: the residual is at roundoff level
            Some(ref b) if cand.residual >= 0.5 * b.residual => {
                return Ok(if cand.residual < b.residual { cand } else { best.unwrap() });
            }
            _ => best = Some(cand),
        }
        n *= 2;
    }
    Err(CqtError::GridExhausted(MAX_GRID))
}

fn split_on_grid<T: Scalar>(
    a: &LaurentSymbol<T>,
    v: &[Complex64],
    eps: f64,
) -> Result<WhFactorization<T>> {
    let n = v.len();
    let half = n / 2;
    let mut phase = v[0].arg();
    let mut logv = Vec::with_capacity(n);
    logv.push(Complex64::new(v[0].norm().ln(), phase));
    for j in 1..n {
        phase += (v[j] / v[j - 1]).arg();
        logv.push(Complex64::new(v[j].norm().ln(), phase));
    }
    let cep = fft::interpolate(&logv);

    let zero = Complex64::new(0.0, 0.0);
    let mut plus = vec![zero; n];
    let mut minus = vec![zero; n];
    plus[..half].copy_from_slice(&cep[..half]);
    minus[half + 1..].copy_from_slice(&cep[half + 1..]);
    // the Nyquist term is shared
    plus[half] = 0.5 * cep[half];
    minus[half] = 0.5 * cep[half];

    let u_vals: Vec<Complex64> = fft::evaluate(0, &plus, n).into_iter().map(|c| c.exp()).collect();
    let l_vals: Vec<Complex64> = fft::evaluate(0, &minus, n).into_iter().map(|c| c.exp()).collect();
    let mut u = LaurentSymbol::<T>::from_fourier(&u_vals, 0, half - 1);
    let l = LaurentSymbol::<T>::from_fourier(&l_vals, half - 1, 0);

    // fix l_0 = 1 exactly and move the scale into u
    let l0 = l.coeff(0);
    if l0.is_zero() {
        return Err(CqtError::VanishingConstant);
    }
    let inv = T::one() / l0;
    let mut lneg: Vec<T> = l.neg().iter().map(|&c| c * inv).collect();
    lneg[0] = T::one();
    let l = LaurentSymbol::new(lneg, vec![T::one()])?;
    u = u.scale(l0);

    // grid roundoff sits near a few ulps; a tighter budget would keep it all
    let eps = eps.max(32.0 * f64::EPSILON);
    let anorm = a.w_norm();
    let u = u.truncate_to_budget(0.5 * eps * anorm / l.w_norm()).canonical();
    let l = l.truncate_to_budget(0.5 * eps * anorm / u.w_norm().max(f64::MIN_POSITIVE)).canonical();
    let residual = (&(&u * &l) - a).w_norm();
    Ok(WhFactorization { u, l, residual })
}

/// Power series `1/u(z)` for a power series `u` with no zeros in the closed
/// unit disk. Truncated so that `||u * (1/u) - 1||_W` stays near `eps`.
pub fn reciprocal_plus<T: Scalar>(u: &LaurentSymbol<T>, eps: f64) -> Result<LaurentSymbol<T>> {
    if u.minus_tail().iter().any(|c| !c.is_zero()) {
        return Err(CqtError::NotOneSided);
    }
    if u.coeff(0).is_zero() {
        return Err(CqtError::VanishingConstant);
    }
    let u = LaurentSymbol::new(vec![u.coeff(0)], u.pos().to_vec())?;
    let kappa = u.winding_number(WINDING_START_GRID)?;
    if kappa != 0 {
        return Err(CqtError::NonzeroWinding(kappa));
    }
    let unorm = u.w_norm();
    let mut n = start_grid(u.band());
    while n <= MAX_GRID {
        let v = u.evaluate_fourier(n)?;
        check_nonvanishing(&v, unorm)?;
        let recip: Vec<Complex64> = v.iter().map(|z| z.inv()).collect();
        let c = fft::interpolate(&recip);
        let total: f64 = c.iter().map(|z| z.norm()).sum();
        // the upper half holds aliases of powers >= n/2
        let alias = c[n / 2..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if alias <= eps.max(8.0 * f64::EPSILON) * total {
            let r = LaurentSymbol::<T>::from_fourier(&recip, 0, n / 2 - 1);
            return Ok(r.truncate_to_budget(eps / unorm).canonical());
        }
        n *= 2;
    }
    Err(CqtError::NonDecay(MAX_GRID))
}

/// Mirror of [`reciprocal_plus`] for power series in `1/z`.
pub fn reciprocal_minus<T: Scalar>(l: &LaurentSymbol<T>, eps: f64) -> Result<LaurentSymbol<T>> {
    Ok(reciprocal_plus(&l.reversed(), eps)?.reversed())
}
