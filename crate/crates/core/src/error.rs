//! Error type shared by every solver module.

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum SolverError {
    /// A thermodynamic input lies outside its domain.
    #[error("domain error: {field} = {value:e} ({reason})")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A cell state violates an admissibility invariant.
    #[error("inadmissible state at cell ({i}, {j}): {detail}")]
    Admissibility { i: usize, j: usize, detail: String },

    /// Invalid configuration or parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// The Krylov solver did not reach its tolerance.
    #[error("linear solver did not converge after {iterations} iterations (residual {residual:e}, target {target:e})")]
    LinearSolver {
        iterations: usize,
        residual: f64,
        target: f64,
        history: Vec<f64>,
    },

    /// The elliptic matrix failed its dominance check.
    #[error("energy matrix not diagonally dominant in column {column} (margin {margin:e})")]
    NotDominant { column: usize, margin: f64 },

    /// Safeguarded Newton iteration failed.
    #[error("scalar root solve failed at cell ({i}, {j}): {detail}")]
    Newton { i: usize, j: usize, detail: String },

    /// Failure inside an IMEX stage.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<SolverError>,
    },

    /// Failure inside a time step.
    #[error("step {step} at t = {time}: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<SolverError>,
    },

    /// Accuracy check failed (e.g. ODE step refinement).
    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    /// Underlying IO failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> SolverError {
    SolverError::Domain {
        field,
        value,
        reason,
    }
}
