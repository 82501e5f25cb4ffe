use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("non-Kähler input: {0}")]
    NonKahler(String),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("jet accuracy exhausted: {0}")]
    JetExhausted(String),
    #[error("mismatched operands: {0}")]
    Mismatch(String),
    #[error("truncation order {0} too small (need at least 3)")]
    OrderTooSmall(u32),
    #[error("type (0,1) constraint violated at weight {weight}")]
    TypeViolation { weight: u32 },
    #[error("not-Killing: {0}")]
    NotKilling(String),
    #[error("not representable in ring: {0}")]
    NotRepresentable(String),
    #[error("obstruction class nonzero in ring: {0}")]
    Obstruction(String),
    #[error("homomorphism defect: {0}")]
    HomomorphismDefect(String),
    #[error("not prequantizable normalization: {0}")]
    NotPrequantizable(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("stray factor of pi: {0}")]
    StrayPi(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
