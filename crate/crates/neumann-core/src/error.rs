use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("hyperbola: level undefined")]
    Hyperbola,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("incompatible data: |∫h| = {integral:e} exceeds {limit:e}")]
    Compatibility { integral: f64, limit: f64 },

    #[error("no convergence after {iterations} iterations (last estimate {estimate}, oscillation {oscillation:e})")]
    NonConvergence { iterations: usize, estimate: f64, oscillation: f64 },

    #[error("degenerate iterate: norm {0:e} collapsed")]
    DegenerateIterate(f64),

    #[error("sign pattern cycling with period {0}")]
    OscillationDetected(usize),

    #[error("shift root-finder did not converge ({0})")]
    ShiftRoot(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
