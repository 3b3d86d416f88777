use nalgebra::ComplexField;
use num_complex::Complex64;

/// Coefficient type shared by symbols, corrections and matrices.
///
/// Implemented for `f64` (the default, used by QBD models) and `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    /// Narrows a complex value; real scalars keep the real part.
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn of_real(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }
    /// Text token with 17 significant digits.
    fn to_token(self) -> String;
    fn parse_token(tok: &str) -> Option<Self>;
}

impl Scalar for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn of_real(x: f64) -> Self {
        x
    }

    fn to_token(self) -> String {
        format!("{:.16e}", self)
    }

    fn parse_token(tok: &str) -> Option<Self> {
        tok.parse::<f64>().ok().filter(|x| x.is_finite())
    }
}

impl Scalar for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn to_c64(self) -> Complex64 {
        self
    }

    // `re,im` without spaces so tokens stay whitespace separated.
    fn to_token(self) -> String {
        format!("{:.16e},{:.16e}", self.re, self.im)
    }

    fn parse_token(tok: &str) -> Option<Self> {
        let (re, im) = match tok.split_once(',') {
            Some((re, im)) => (re.parse::<f64>().ok()?, im.parse::<f64>().ok()?),
            None => (tok.parse::<f64>().ok()?, 0.0),
        };
        (re.is_finite() && im.is_finite()).then(|| Complex64::new(re, im))
    }
}
