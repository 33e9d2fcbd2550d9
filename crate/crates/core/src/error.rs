use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("linear program is infeasible (phase-one residual {residual:.3e}); increase the number of draws")]
    Infeasible { residual: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("refinement did not converge after {iterations} iterations (max discrepancy {max_discrepancy:.4})")]
    NoConvergence { iterations: usize, max_discrepancy: f64 },
    #[error("grid point gamma={gamma} duplicates an existing point")]
    DuplicateGridPoint { gamma: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cannot parse CVF model: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
