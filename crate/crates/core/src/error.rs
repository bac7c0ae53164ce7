use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration did not converge after {iterations} iterations (|discriminant| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("point is not an exceptional point (|discriminant| = {residual:e})")]
    NotAnEp { residual: f64 },

    #[error("loop step {step} lies on an exceptional point (|discriminant| = {residual:e})")]
    PathTouchesEp { step: usize, residual: f64 },

    #[error("ambiguous band assignment between steps {step} and {next} after {depth} refinements (margin {margin:e})")]
    AmbiguousMatch { step: usize, next: usize, depth: usize, margin: f64 },

    #[error("holonomy determinant is not unimodular (|det U| = {modulus})")]
    NonUnimodularDeterminant { modulus: f64 },

    #[error("loops do not share an anchor: {0}")]
    AnchorMismatch(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("frequency {omega} lies within {distance:e} of a pole")]
    PoleProximity { omega: f64, distance: f64 },

    #[error("fit diverged: residual {residual:e} exceeds {threshold:e}")]
    FitDiverged { residual: f64, threshold: f64 },

    #[error("transport result is flagged unreliable (min overlap {min_overlap})")]
    Unreliable { min_overlap: f64 },
}
