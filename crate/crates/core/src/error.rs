use thiserror::Error;

/// Errors produced by alphabet construction, design, mapping, analysis and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate infeasible: {0}")]
    RateInfeasible(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("degenerate alphabet: {0}")]
    DegenerateAlphabet(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid design problem: {0}")]
    InvalidProblem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symbol {0} is not in the codebook")]
    UnknownSymbol(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    NonConvergence { achieved: f64 },

    #[error("next frame holds {available} bits, cannot complete a trailing fragment")]
    ExhaustedInput { available: usize },

    #[error("search budget exceeded: {nodes} nodes > budget {budget}")]
    BudgetExceeded { nodes: usize, budget: usize },

    #[error("monotonicity violated: {0}")]
    NonMonotone(String),

    #[error("counterexample: {0}")]
    Counterexample(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
