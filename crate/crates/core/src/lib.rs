//! Arithmetic on semi-infinite quasi-Toeplitz matrices `T(a) + E` and a
//! cyclic reduction solver for the matrix equations of quasi-birth-death
//! processes with infinitely many phases.

pub mod correction;
pub mod cqt;
pub mod cr;
pub mod error;
pub mod factorization;
mod fft;
pub mod format;
pub mod qbd;
pub mod scalar;
pub mod symbol;

pub use correction::{toeplitz_apply, Correction};
pub use cqt::{hankel_product_factors, CqtMatrix, DEFAULT_TOL};
pub use cr::{
    cr_step, residual, scalar_cr, solve_g, solve_r, CrState, QuadraticSolveReport, ScalarCrState, Side,
    DEFAULT_CR_TOL,
};
pub use error::{CqtError, Result};
pub use factorization::{reciprocal_minus, reciprocal_plus, wiener_hopf, WhFactorization};
pub use format::{
    parse_correction, parse_matrix, parse_params, parse_symbol, write_correction, write_matrix, write_params,
    write_symbol,
};
pub use qbd::{
    check_root_split, jackson_blocks, preset_by_name, quadratic_roots, validate_theorem_hypotheses,
    HypothesisReport, JacksonParams, Preset, QbdTriple, PRESETS,
};
pub use scalar::Scalar;
pub use symbol::LaurentSymbol;
