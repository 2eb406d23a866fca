use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty distribution")]
    Empty,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("total mass {total} differs from 1 by more than {tol}")]
    MassNotOne { total: f64, tol: f64 },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid partition witness: {0}")]
    InvalidWitness(String),

    #[error("trace does not match table: {0}")]
    TraceMismatch(String),

    #[error("prefix sums reached only {reached} after {atoms} atoms")]
    NonSummable { atoms: usize, reached: f64 },

    #[error("{rows}x{cols} exceeds the oracle cap of {cap} cells")]
    TooLarge { rows: usize, cols: usize, cap: usize },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("interval ({start}, {start}+{len}) carries mass {mass}")]
    NotZeroOnInterval { start: f64, len: f64, mass: f64 },

    #[error("quadrature on [{a}, {b}] did not converge (estimate {estimate}, error {error})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("grid has no joint masses")]
    MissingJoint,
}

pub type Result<T> = core::result::Result<T, Error>;
