use thiserror::Error;

/// Errors raised by the engine. Messages are stable: the CLI surfaces them
/// verbatim in diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite amplitude component")]
    NonFinite,
    #[error("degenerate representation")]
    DegenerateRepresentation,
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid functional: {0}")]
    InvalidFunctional(String),
    #[error("magnitude overflow")]
    MagnitudeOverflow,
    #[error("polar form defined for even degree only")]
    OddPolarDegree,
    #[error("not an odd-degree functional")]
    NotOddDegree,
    #[error("scaling by zero is uninformative")]
    ZeroScale,
    #[error("not a basis change")]
    NotABasisChange,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cross term arises only for p >= 2")]
    CrossTermExponent,
    #[error("cross-term extraction needs a 2x2 basis change")]
    CrossTermDimension,
    #[error("nontriviality floor too high")]
    InfeasibleFloor,
    #[error("no events")]
    NoEvents,
    #[error("instruments related by non-unitary change")]
    NonUnitaryChange,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
