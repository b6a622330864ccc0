use thiserror::Error;

/// Errors raised by design solvers and numeric primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParams {
        field: &'static str,
        message: String,
    },

    #[error("integrand evaluated to a non-finite value at {at}")]
    InvalidIntegrand { at: f64 },

    #[error("bisection bracket [{lo}, {hi}] does not contain a sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("bisection failed to converge within {max_iterations} iterations")]
    Convergence { max_iterations: u32 },

    #[error("no feasible design: per-arm sample size exceeds cap of {cap}")]
    InfeasibleDesign { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
