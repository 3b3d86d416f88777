use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CqtError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CqtError {
    #[error("grid of {grid} points cannot hold a symbol with support {support}")]
    GridTooSmall { grid: usize, support: usize },

    #[error("grid size {0} is not a power of two")]
    GridNotPowerOfTwo(usize),

    #[error("symbol vanishes on the unit circle (min |a(z)| = {min:e})")]
    SymbolVanishes { min: f64 },

    #[error("symbol has nonzero winding number {0}")]
    NonzeroWinding(i64),

    #[error("no convergence within a grid of {0} points")]
    GridExhausted(usize),

    #[error("factor is not one-sided")]
    NotOneSided,

    #[error("constant coefficient of the factor vanishes")]
    VanishingConstant,

    #[error("reciprocal coefficients do not decay within a grid of {0} points")]
    NonDecay(usize),

    #[error("capacitance matrix is singular (pivot {pivot:e}); the matrix is not invertible")]
    SingularCapacitance { pivot: f64 },

    #[error(
        "cyclic reduction broke down at step {step} (|A-1| = {am1_norm:e}, |A0| = {a0_norm:e}, |A1| = {a1_norm:e}): {source}"
    )]
    Breakdown {
        step: usize,
        am1_norm: f64,
        a0_norm: f64,
        a1_norm: f64,
        #[source]
        source: Box<CqtError>,
    },

    #[error("no convergence after {0} iterations")]
    MaxIterations(usize),

    #[error("scalar recurrence did not converge at grid point {index} (z = {z})")]
    ScalarNoConvergence { index: usize, z: Complex64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("theorem hypotheses not met: {0}")]
    HypothesesUnmet(String),

    #[error("malformed symbol: {0}")]
    Layout(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl CqtError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        CqtError::Parse {
            line,
            msg: msg.into(),
        }
    }
}
