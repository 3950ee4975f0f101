use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precision exhausted: only {certified} partial quotients can be certified")]
    PrecisionExhausted { certified: usize },

    #[error("frequency is rational ({0})")]
    RationalFrequency(String),

    #[error("insufficient continued-fraction depth: need {needed} convergents, have {have}")]
    InsufficientDepth { needed: usize, have: usize },

    #[error("integer overflow while building convergents at depth {0}")]
    ConvergentOverflow(usize),

    #[error("malformed decimal literal `{0}`")]
    MalformedDecimal(String),

    #[error("transfer product left the representable range at step {step}")]
    OverflowGuard { step: usize },

    #[error("acceleration not quantized (residual {residual:.3}); regime is unclassifiable")]
    Unclassifiable { residual: f64 },

    #[error("value {0} outside the rotation-number range [0, 1/2]")]
    RotationDomain(f64),

    #[error("evaluation point {z} is within {distance:.3e} of the support of dN (minimum {min:.3e})")]
    PoleProximity { z: String, distance: f64, min: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
