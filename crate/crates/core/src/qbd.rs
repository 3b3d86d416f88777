//! Quasi-birth-death blocks of the two-node Jackson tandem network and the
//! root-splitting checks behind cyclic reduction's convergence.
//!
//! The level counts customers at node 2, the phase those at node 1. Each
//! block is written `T(a_i) + E_i` with tridiagonal symbols
//! `a_i(z) = a_{i,-1} z^-1 + a_{i,0} + a_{i,1} z`.

use num_complex::Complex64;

use crate::correction::Correction;
use crate::cqt::CqtMatrix;
use crate::error::{CqtError, Result};
use crate::symbol::LaurentSymbol;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacksonParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Routing probability from node 1 to node 2.
    pub p: f64,
    /// Routing probability from node 2 to node 1.
    pub q: f64,
}

impl JacksonParams {
    pub fn new(lambda1: f64, lambda2: f64, mu1: f64, mu2: f64, p: f64, q: f64) -> Result<Self> {
        let params = Self { lambda1, lambda2, mu1, mu2, p, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CqtError::InvalidParameter(format!("{name} must be a positive rate, got {v}")));
            }
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CqtError::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// The blocks `A-1`, `A0`, `A1` of a QBD generator.
#[derive(Clone, Debug)]
pub struct QbdTriple {
    pub am1: CqtMatrix,
    pub a0: CqtMatrix,
    pub a1: CqtMatrix,
}

impl QbdTriple {
    /// Checks the shape: symbols of degree at most one on each side and
    /// corrections confined to the leading `1 x 2` block.
    pub fn new(am1: CqtMatrix, a0: CqtMatrix, a1: CqtMatrix) -> Result<Self> {
        for (name, m) in [("A-1", &am1), ("A0", &a0), ("A1", &a1)] {
            if m.symbol().n_minus() > 1 || m.symbol().n_plus() > 1 {
                return Err(CqtError::InvalidParameter(format!("{name} symbol is not tridiagonal")));
            }
            let c = m.correction();
            if !c.is_zero() {
                let d = c.to_dense();
                let outside = d
                    .iter()
                    .enumerate()
                    .any(|(idx, x)| *x != 0.0 && (idx % d.nrows() > 0 || idx / d.nrows() > 1));
                if outside {
                    return Err(CqtError::InvalidParameter(format!(
                        "{name} correction reaches beyond the entries (1,1), (1,2)"
                    )));
                }
            }
        }
        Ok(Self { am1, a0, a1 })
    }

    pub fn symbols(&self) -> [&LaurentSymbol; 3] {
        [self.am1.symbol(), self.a0.symbol(), self.a1.symbol()]
    }

    /// `a_{i,j}` for block `i` and power `j`, both in `-1..=1`.
    pub fn coeff(&self, i: isize, j: isize) -> f64 {
        self.symbols()[(i + 1) as usize].coeff(j)
    }
}

pub fn jackson_blocks(params: &JacksonParams) -> Result<QbdTriple> {
    params.validate()?;
    let JacksonParams { lambda1, lambda2, mu1, mu2, p, q } = *params;
    let am1 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(0, &[(1.0 - q) * mu2, q * mu2]).canonical());
    let a1 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(-1, &[p * mu1, lambda2]).canonical());
    // node 1 is idle in the first phase: no service term on the diagonal
    let a0 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(
        -1,
        &[(1.0 - p) * mu1, -(lambda1 + lambda2 + mu1 + mu2), lambda1],
    ).canonical())
    .with_correction(Correction::unit(0, 0, mu1));
    QbdTriple::new(am1, a0, a1)
}

/// Per-condition outcome of the root-splitting theorem's hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    pub tridiagonal: bool,
    pub zero_sum: bool,
    pub center_negative: bool,
    pub off_center_nonnegative: bool,
    /// `a_{-1,0} > 0` or `a_{1,0} > 0`.
    pub vertical_move: bool,
    /// Some `a_{i,j} != 0` with `j != 0`.
    pub horizontal_move: bool,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.tridiagonal
            && self.zero_sum
            && self.center_negative
            && self.off_center_nonnegative
            && self.vertical_move
            && self.horizontal_move
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.tridiagonal, "symbols are not tridiagonal"),
            (self.zero_sum, "coefficients do not sum to zero"),
            (self.center_negative, "a(0,0) is not negative"),
            (self.off_center_nonnegative, "an off-center coefficient is negative"),
            (self.vertical_move, "a(-1,0) and a(1,0) both vanish"),
            (self.horizontal_move, "no coefficient with a nonzero power of z"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, msg)| msg)
        .collect()
    }
}

pub fn validate_theorem_hypotheses(t: &QbdTriple) -> HypothesisReport {
    let idx = [-1isize, 0, 1];
    let all = || idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j)));
    let scale: f64 = all().map(|(i, j)| t.coeff(i, j).abs()).sum();
    let sum: f64 = all().map(|(i, j)| t.coeff(i, j)).sum();
    HypothesisReport {
        tridiagonal: t.symbols().iter().all(|s| s.n_minus() <= 1 && s.n_plus() <= 1),
        zero_sum: sum.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) && scale > 0.0,
        center_negative: t.coeff(0, 0) < 0.0,
        off_center_nonnegative: all().filter(|&ij| ij != (0, 0)).all(|(i, j)| t.coeff(i, j) >= 0.0),
        vertical_move: t.coeff(-1, 0) > 0.0 || t.coeff(1, 0) > 0.0,
        horizontal_move: all().any(|(i, j)| j != 0 && t.coeff(i, j) != 0.0),
    }
}

fn eval(s: &LaurentSymbol, z: Complex64) -> Complex64 {
    s.terms().map(|(k, c)| c * z.powi(k as i32)).sum()
}

/// Roots of `p_z(x) = a1(z) x^2 + a0(z) x + a-1(z)`, smaller modulus first.
/// A vanishing leading coefficient puts the second root at infinity.
pub fn quadratic_roots(t: &QbdTriple, z: Complex64) -> (Complex64, Complex64) {
    let [m, d, p] = t.symbols().map(|s| eval(s, z));
    let scale = m.norm() + d.norm() + p.norm();
    let inf = Complex64::new(f64::INFINITY, 0.0);
    if p.norm() <= 1e-15 * scale {
        let r = if d.norm() == 0.0 { inf } else { -m / d };
        return (r, inf);
    }
    let disc = (d * d - 4.0 * p * m).sqrt();
    // pick the sign that avoids cancellation
    let big = if (d.conj() * disc).re >= 0.0 { -(d + disc) / 2.0 } else { -(d - disc) / 2.0 };
    let (x1, x2) = if big.norm() == 0.0 { (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) } else { (m / big, big / p) };
    if x1.norm() <= x2.norm() {
        (x1, x2)
    } else {
        (x2, x1)
    }
}

/// Whether `p_z` has one root inside and one outside the unit circle, for
/// `z != 1` on the circle. Fails if the triple does not meet the theorem's
/// hypotheses.
pub fn check_root_split(t: &QbdTriple, z: Complex64) -> Result<bool> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(CqtError::InvalidParameter(format!("{z} is not on the unit circle")));
    }
    if (z - 1.0).norm() < 1e-12 {
        return Err(CqtError::InvalidParameter("z = 1 carries the root x = 1".into()));
    }
    let report = validate_theorem_hypotheses(t);
    if !report.all_pass() {
        return Err(CqtError::HypothesesUnmet(report.failures().join("; ")));
    }
    let (x1, x2) = quadratic_roots(t, z);
    Ok(x1.norm() < 1.0 && x2.norm() > 1.0)
}

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub params: JacksonParams,
}

const fn preset(name: &'static str, l1: f64, l2: f64, m1: f64, m2: f64, p: f64, q: f64) -> Preset {
    Preset {
        name,
        params: JacksonParams { lambda1: l1, lambda2: l2, mu1: m1, mu2: m2, p, q },
    }
}

/// Ten stable parameter sets over `p, q` in `{0, 0.5, 1}` with balanced and
/// unbalanced loads. These are illustrative cases of our own choosing, not a
/// published benchmark. All keep `mu2 >= 2 (lambda2 + p mu1)`, so the two roots
/// at `z = 1` differ at least by a factor of two and `a1(z)` has no zero on
/// the circle.
pub const PRESETS: [Preset; 10] = [
    preset("p0q0-balanced", 1.0, 1.0, 2.0, 2.0, 0.0, 0.0),
    preset("p0q0-unbalanced", 1.0, 0.5, 1.5, 3.0, 0.0, 0.0),
    preset("p05q0-balanced", 1.0, 1.0, 3.0, 5.0, 0.5, 0.0),
    preset("p05q0-unbalanced", 2.0, 0.5, 3.0, 4.0, 0.5, 0.0),
    preset("p0q05-balanced", 1.0, 1.0, 3.0, 3.0, 0.0, 0.5),
    preset("p0q05-unbalanced", 0.5, 2.0, 2.0, 4.0, 0.0, 0.5),
    preset("p05q05-balanced", 1.0, 1.0, 4.0, 6.0, 0.5, 0.5),
    preset("p05q05-unbalanced", 2.0, 0.5, 5.0, 6.0, 0.5, 0.5),
    preset("p1q0", 1.0, 1.0, 3.0, 8.0, 1.0, 0.0),
    preset("p0q1", 1.0, 1.0, 4.0, 3.0, 0.0, 1.0),
];

pub fn preset_by_name(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn example() -> QbdTriple {
        jackson_blocks(&JacksonParams::new(1.0, 2.0, 3.0, 4.0, 0.1, 0.2).unwrap()).unwrap()
    }

    fn unit(j: usize, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
    }

    #[test]
    fn blocks_by_substitution() {
        let t = example();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-15;
        assert!(close(t.coeff(-1, 0), 3.2) && close(t.coeff(-1, 1), 0.8));
        assert!(close(t.coeff(1, 0), 2.0) && close(t.coeff(1, -1), 0.3));
        assert!(close(t.coeff(0, 0), -10.0) && close(t.coeff(0, 1), 1.0) && close(t.coeff(0, -1), 2.7));
        assert_eq!(t.a0.finite_section(2)[(0, 0)], -7.0);
        assert!(t.am1.correction().is_zero() && t.a1.correction().is_zero());
        assert_eq!(t.a0.correction().rank(), 1);
    }

    #[test]
    fn decoupled_routing_gives_diagonal_blocks() {
        let t = jackson_blocks(&JacksonParams::new(1.0, 2.0, 3.0, 4.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(t.am1.symbol(), &LaurentSymbol::constant(4.0));
        assert_eq!(t.a1.symbol(), &LaurentSymbol::constant(2.0));
    }

    #[test]
    fn rows_of_the_generator_sum_to_zero() {
        for p in PRESETS {
            let t = jackson_blocks(&p.params).unwrap();
            let n = 12;
            let sum = t.am1.block(n, n + 1) + t.a0.block(n, n + 1) + t.a1.block(n, n + 1);
            for r in 0..n {
                assert!(sum.row(r).sum().abs() < 1e-14, "{} row {r}", p.name);
            }
            let diag = -t.coeff(0, 0);
            assert!(t.am1.qt_norm() + t.a1.qt_norm() <= diag);
        }
    }

    #[test]
    fn parameter_domain() {
        assert!(JacksonParams::new(0.0, 1.0, 1.0, 1.0, 0.5, 0.5).is_err());
        assert!(JacksonParams::new(1.0, 1.0, 1.0, f64::NAN, 0.5, 0.5).is_err());
        assert!(JacksonParams::new(1.0, 1.0, 1.0, 1.0, 1.5, 0.5).is_err());
        assert!(JacksonParams::new(1.0, 1.0, 1.0, 1.0, 0.5, -0.1).is_err());
    }

    #[test]
    fn hypotheses() {
        assert!(validate_theorem_hypotheses(&example()).all_pass());

        let zero = CqtMatrix::zero();
        let t = QbdTriple::new(zero.clone(), zero.clone(), zero).unwrap();
        let r = validate_theorem_hypotheses(&t);
        assert!(!r.center_negative && !r.zero_sum && !r.all_pass());

        let mut t = example();
        t.a0 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(-1, &[2.7, 10.0, 1.0]));
        let r = validate_theorem_hypotheses(&t);
        assert!(!r.center_negative && !r.all_pass());
    }

    #[test]
    fn root_split_at_minus_one_and_around() {
        let t = example();
        assert!(check_root_split(&t, Complex64::new(-1.0, 0.0)).unwrap());
        for j in 1..64 {
            assert!(check_root_split(&t, unit(j, 64)).unwrap());
        }
        assert!(check_root_split(&t, Complex64::new(1.0, 0.0)).is_err());
        assert!(check_root_split(&t, Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn roots_at_one() {
        let t = example();
        let (x1, x2) = quadratic_roots(&t, Complex64::new(1.0, 0.0));
        let ratio = t.am1.symbol().w_norm() / t.a1.symbol().w_norm();
        // a-1(1) = 4, a1(1) = 2.3
        assert!((x1 - 1.0).norm() < 1e-14);
        assert!((x2 - ratio).norm() < 1e-14);
    }

    #[test]
    fn vertical_moves_required() {
        // only z-terms in the outer blocks
        let am1 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(1, &[1.0]));
        let a1 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(-1, &[1.0]));
        let a0 = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(-1, &[1.0, -4.0, 1.0]));
        let t = QbdTriple::new(am1, a0, a1).unwrap();
        assert!(!validate_theorem_hypotheses(&t).vertical_move);
        assert!(matches!(check_root_split(&t, Complex64::new(-1.0, 0.0)), Err(CqtError::HypothesesUnmet(_))));
    }

    #[test]
    fn leading_coefficient_may_vanish() {
        let am1 = CqtMatrix::toeplitz(LaurentSymbol::constant(1.0));
        let a0 = CqtMatrix::toeplitz(LaurentSymbol::constant(-2.0));
        let t = QbdTriple::new(am1, a0, CqtMatrix::zero()).unwrap();
        let (x1, x2) = quadratic_roots(&t, Complex64::new(-1.0, 0.0));
        assert!((x1 - 0.5).norm() < 1e-15);
        assert!(x2.re.is_infinite());
    }

    #[test]
    fn shape_is_enforced() {
        let wide = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(0, &[1.0, 1.0, 1.0]));
        assert!(QbdTriple::new(wide, CqtMatrix::zero(), CqtMatrix::zero()).is_err());
        let far = CqtMatrix::identity().with_correction(Correction::unit(1, 0, 1.0));
        assert!(QbdTriple::new(far, CqtMatrix::zero(), CqtMatrix::zero()).is_err());
    }

    #[test]
    fn presets_are_valid_and_named_uniquely() {
        for (i, p) in PRESETS.iter().enumerate() {
            p.params.validate().unwrap();
            let t = jackson_blocks(&p.params).unwrap();
            assert!(validate_theorem_hypotheses(&t).all_pass(), "{}", p.name);
            assert!(PRESETS[..i].iter().all(|o| o.name != p.name));
            assert_eq!(preset_by_name(p.name).unwrap().name, p.name);
        }
    }
}
