use thiserror::Error;

use crate::measures::MeasureResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("matrix is not Hermitian (max |A - A^dagger| entry = {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },

    #[error("state has trace {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("state is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("alpha = {alpha} outside the admissible range [{min}, {max}] for d = {d}")]
    AlphaOutOfRange {
        d: usize,
        alpha: f64,
        min: f64,
        max: f64,
    },

    #[error("isotropic state with d = {d}, alpha = {alpha} is separable (threshold 1/(d+1) = {threshold})")]
    SeparableRegime {
        d: usize,
        alpha: f64,
        threshold: f64,
    },

    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("guess and target coincide (distance {distance:e}); no separating hyperplane")]
    DegenerateWitness { distance: f64 },

    #[error("vector {name} is not a unit vector (norm {norm})")]
    NonUnitVector { name: &'static str, norm: f64 },

    #[error("coefficient {index} has imaginary part {imag:e}; input is not Hermitian")]
    ComplexCoefficient { index: usize, imag: f64 },

    #[error("generator expansion for d = {d} is not of the form sum_i c_i g_i (x) g_i: coefficient ({i}, {j}) = {coefficient}")]
    GammaExpansion {
        d: usize,
        i: usize,
        j: usize,
        coefficient: f64,
    },

    #[error("invalid product ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("product-state minimization did not converge in {iterations} iterations on any start (best value {best_value})")]
    SolverNoConvergence { best_value: f64, iterations: usize },

    #[error("nearest-separable projection stopped after {} iterations with gap {:e}", .partial.iterations, .partial.gap_certificate)]
    ProjectionNoConvergence { partial: Box<MeasureResult> },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative solver, as opposed to invalid input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::SolverNoConvergence { .. }
                | Error::ProjectionNoConvergence { .. }
        )
    }
}
