use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register size {0} is out of range (1..=8 variables)")]
    RegisterSize(usize),

    #[error("state index {index} out of range for dimension {dim}")]
    StateIndex { index: usize, dim: usize },

    #[error("contradictory literals: variable {0} required both true and false")]
    ContradictoryLiterals(usize),

    #[error("invalid literal {literal} for a register of {n_vars} variables")]
    InvalidLiteral { literal: i32, n_vars: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("constraint {index} is inconsistent with the preceding rows")]
    InconsistentConstraint { index: usize },

    #[error("probability {value} outside [0, 1]")]
    ProbabilityRange { value: f64 },

    #[error("system is infeasible")]
    Infeasible,

    #[error("array is not a probability distribution (sum = {sum})")]
    NotADistribution { sum: f64 },

    #[error("point is not inside the polytope (residual {residual:.3e})")]
    OutsidePolytope { residual: f64 },

    #[error("empty polytope")]
    EmptyPolytope,

    #[error(
        "maximum-entropy iteration did not converge after {iterations} steps \
         (gradient norm {grad_norm:.3e})"
    )]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("matrix is not a valid density operator: {0}")]
    InvalidDensityOperator(String),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("Kraus operators do not resolve the identity (residual {0:.3e})")]
    IncompleteKraus(f64),

    #[error("effect is not bounded by the identity (eigenvalue {0})")]
    InvalidEffect(f64),

    #[error("expectation of the effect is zero; no induced distribution")]
    ZeroExpectation,

    #[error("observable is not diagonal in the requested chart (residual {0:.3e})")]
    NotDiagonalInChart(f64),

    #[error("ancilla dimension {d_b} is smaller than the simplex rank {rank}")]
    AncillaTooSmall { d_b: usize, rank: usize },

    #[error("mutually unbiased bases are only constructed for 1..=3 variables, got {0}")]
    UnsupportedMubSize(usize),

    #[error("empty measurement family")]
    EmptyFamily,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
