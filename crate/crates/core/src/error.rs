use thiserror::Error;

use crate::solver::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The relaxation flow did not reach the requested residual.
    #[error("relaxation did not converge after {} steps (residual {:.3e})", .report.relaxation_steps, .report.residual_inf_norm)]
    Convergence { report: Box<SolveReport> },

    #[error("newton refinement failed: {0}")]
    Refinement(String),

    #[error(
        "eigen-iteration stalled after {iterations} iterations (estimate {estimate:.6e}, residual {residual:.3e})"
    )]
    Spectral {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("simulation became unstable at t = {time:.4} (|z| = {modulus:.3e})")]
    Instability { time: f64, modulus: f64 },

    #[error("polar decomposition undefined: zero modulus at cell ({i}, {j})")]
    Decomposition { i: i64, j: i64 },

    /// A solver error annotated with the lattice size it came from.
    #[error("N = {n}: {source}")]
    AtSize {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_size(n: usize, err: Error) -> Self {
        Error::AtSize {
            n,
            source: Box::new(err),
        }
    }
}
