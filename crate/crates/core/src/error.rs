use thiserror::Error;

/// Errors raised by curve validation, tree addressing, symbol
/// manipulation and relation rewriting.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),

    #[error("curve is singular: discriminant is 0 mod {q}")]
    SingularCurve { q: u64 },

    #[error("invalid vertex address {addr}: {reason}")]
    InvalidAddress { addr: String, reason: String },

    #[error("vertex {addr} is not a cusp anchor: {reason}")]
    NotAnAnchor { addr: String, reason: String },

    #[error("vertex {addr} with label {label} is not a minimal vertex")]
    NotMinimal { addr: String, label: String },

    #[error("degenerate symbol: both cusps anchor at {addr}")]
    DegenerateSymbol { addr: String },

    #[error("rule {rule} cannot be instantiated at site {site}: wrong site type")]
    WrongSiteType { rule: String, site: String },

    #[error("cusp {cusp} is not attached to site {site}")]
    CuspNotAttached { cusp: String, site: String },

    #[error("cusp tuple has the wrong shape for {rule} at {site}: {reason}")]
    YShapeViolated {
        rule: String,
        site: String,
        reason: String,
    },

    #[error("input formal sum is not cusp-balanced")]
    UnbalancedInput,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
