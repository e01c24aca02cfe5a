use thiserror::Error;

/// Library-wide error type. Variants carry enough context to map onto the
/// CLI exit-code contract (domain errors vs numerical failures).
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),

    /// A family spec string or table file could not be parsed.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// The requested transform or moment diverges for this law.
    #[error("divergent: {0}")]
    Divergent(String),

    /// The family is not a generalized gamma convolution (signed Thorin measure
    /// or non-completely-monotone jump structure).
    #[error("not a GGC: {0}")]
    NotGgc(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: {reason} (residual {residual:.3e})")]
    QuadratureFail { reason: String, residual: f64 },

    /// An empirical estimator was given no mass on a required side.
    #[error("insufficient mass: {0}")]
    InsufficientMass(String),

    /// A ratio estimator degenerated (0/0 or non-finite denominator).
    #[error("degenerate division: {0}")]
    DivisionDegenerate(String),

    /// A scaled value overflowed the representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Input/output failure while reading a quantile table.
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
