use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not real-diagonalizable: {0}")]
    NotRealDiagonalizable(String),
    #[error("subspace not invariant: {0}")]
    NotInvariant(String),
    #[error("not an sl2 module: {0}")]
    NotAnSl2Module(String),
    #[error("boundary-degenerate: zeta denominator vanishes")]
    BoundaryDegenerate,
    #[error("numeric underflow: imaginary part collapsed to zero")]
    NumericUnderflow,
    #[error("non-convergence: reduction iteration cap exceeded")]
    NonConvergence,
    #[error("divergent region: no integrable cusp tail")]
    DivergentRegion,
    #[error("magnitude overflow: |t| too large for exponential conjugation")]
    MagnitudeOverflow,
    #[error("no divergence: displacement never reaches the threshold")]
    NoDivergence,
    #[error("factorization undefined: pivot entry vanishes")]
    FactorizationUndefined,
    #[error("not hyperbolic: trace <= 2")]
    NotHyperbolic,
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 2 for input
    /// validation, 3 for numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::BudgetExceeded(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
