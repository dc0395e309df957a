use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("input vector is empty")]
    EmptyInput,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("unsupported bit width {bits} (allowed {min}..={max})")]
    BitWidth { bits: u32, min: u32, max: u32 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("wavelength {lambda_nm:.4} nm outside validity window [{lo_nm:.4}, {hi_nm:.4}] nm")]
    WavelengthOutOfRange { lambda_nm: f64, lo_nm: f64, hi_nm: f64 },

    #[error("{channels} channels exceed the dispersion validity window (max {max})")]
    TooManyChannels { channels: usize, max: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("device `{device}`: {reason}")]
    InvalidDevice { device: String, reason: String },

    #[error("device library is missing required device `{0}`")]
    MissingDevice(String),

    #[error("unknown {kind} preset `{name}` (available: {available})")]
    UnknownPreset { kind: &'static str, name: String, available: String },

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
}
