//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by phase-space, state, simulator and polytope operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two bit vectors of different lengths were combined.
    #[error("bit-vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    /// A qubit index was outside `[0, n)`.
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    /// CNOT with control equal to target.
    #[error("CNOT control and target must differ (both {0})")]
    ControlEqualsTarget(usize),

    /// Matrix or vector dimensions do not match the expected qubit count.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A state failed a physical-validity check (trace, hermiticity, PSD, norm).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A measurement effect failed its validity check.
    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    /// An operation was asked to run above its supported size.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// A quasiprobability table is not positive within tolerance.
    /// Reports the worst offending entry.
    #[error(
        "distribution is not KD positive: entry (g={g}, chi={chi}) = {re}{im:+}i exceeds tolerance {tol}"
    )]
    NotKdPositive {
        g: String,
        chi: String,
        re: f64,
        im: f64,
        tol: f64,
    },

    /// Circuit text failed to parse.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Division by a vanishing mana (free input state has no finite bound).
    #[error("input state has zero mana; no finite distillation bound exists")]
    ZeroMana,

    /// The LP solver failed for a reason other than proven infeasibility.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A numeric residue exceeded the tolerance that the algebra guarantees.
    #[error("numeric inconsistency: {0}")]
    Numeric(String),

    /// Malformed serialized input (JSON state files, CSS names, ...).
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
