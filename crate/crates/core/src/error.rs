use thiserror::Error;

/// Everything that can go wrong while building, measuring, sampling or
/// filtering a two-qubit state.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not Hermitian: ‖ρ − ρ†‖_F = {deviation:e} exceeds tolerance")]
    NotHermitian { deviation: f64 },

    #[error("trace is not one: |Tr ρ − 1| = {deviation:e} (Tr ρ = {trace})")]
    TraceNotOne { trace: f64, deviation: f64 },

    #[error("not positive semi-definite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("ansatz populations sum to {sum}, expected x + y + a + b + γ = 1")]
    NormalizationViolated { sum: f64 },

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("no analytic envelope for the {0} mixedness metric")]
    UnsupportedMetric(&'static str),

    #[error("filter success probability {prob:e} is vanishing")]
    VanishingSuccess { prob: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
