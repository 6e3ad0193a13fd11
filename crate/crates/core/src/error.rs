use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("zero polynomial has no cyclotomic divisors")]
    ZeroPolynomial,

    #[error("sublattice is not contained in the reference lattice")]
    NotContained,

    #[error("invalid input: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("unknown holonomy label `{0}`")]
    UnknownLabel(String),

    #[error("averaged sum {sum} is not divisible by [pi:Gamma] = {order}")]
    NonIntegral { sum: String, order: usize },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(vec![msg.into()])
    }
}
