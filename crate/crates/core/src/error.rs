use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),

    #[error("extension exponent m must be positive")]
    ZeroExponent,

    #[error("extension degree r must be 2 or 3, got {0}")]
    UnsupportedDegree(u32),

    #[error("field of order {order} exceeds the supported cap {cap}")]
    FieldTooLarge { order: u64, cap: u64 },

    #[error("no monic irreducible polynomial of degree {degree} found over a field of order {base_order}")]
    NoIrreducible { degree: u32, base_order: u32 },

    #[error("element index {index} does not belong to a field of order {order}")]
    ForeignElement { index: u32, order: u32 },

    #[error("{0}")]
    InvalidCurve(String),

    #[error("operation requires r = 3, the tower was built with r = {0}")]
    RequiresCubicExtension(u32),

    #[error("{what} at q = {q} exceeds the exhaustive budget (q <= {max}); pass --sample")]
    Budget { what: &'static str, q: u32, max: u32 },

    #[error("{0}")]
    Precondition(String),

    #[error("mathematical finding: {0}")]
    Finding(String),
}

pub type Result<T> = std::result::Result<T, Error>;
