//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OjaError {
    /// A vector with (near-)zero Euclidean norm cannot be normalized.
    #[error("cannot normalize a vector with norm <= 1e-300")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The Jacobi eigensolver did not reach its off-diagonal tolerance.
    #[error("eigensolver failed to converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    /// Step-size schedules and gap-dependent bounds require lambda1 > lambda2.
    #[error("degenerate spectral gap ({gap}); need gap > 0")]
    DegenerateGap { gap: f64 },

    #[error("alpha = {alpha} is invalid; need alpha > 1/2")]
    BadAlpha { alpha: f64 },

    #[error("n = {n} samples but the bound needs n > beta = {beta}")]
    InsufficientSamples { n: u64, beta: f64 },

    /// exp(18 Vbar sum eta_i^2) - 1 >= delta makes the Q factor nonpositive:
    /// the convergence bound is vacuous for this schedule.
    #[error("nonpositive Q: exp(18 Vbar sum eta^2) - 1 = {inflation} >= delta = {delta}")]
    NonpositiveQ { inflation: f64, delta: f64 },

    #[error("quadratic form v~^T B B^T v~ <= 1e-300; trace ratio undefined")]
    SingularDenominator,

    /// A lemma verifier was invoked with a step size violating the lemma hypothesis.
    #[error("step-size hypothesis violated at index {index}: eta = {eta} > cap = {cap}")]
    HypothesisViolated { index: usize, eta: f64, cap: f64 },

    #[error("block power needs n >= num_blocks (n = {n}, num_blocks = {num_blocks})")]
    EmptyBlock { n: u64, num_blocks: u64 },

    /// Weiszfeld iteration ran out of iterations; `best` is the last iterate.
    #[error("geometric median did not converge within {iters} iterations")]
    MaxIterExceeded { iters: usize, best: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("replay stream: {0}")]
    Replay(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OjaError>;
