use thiserror::Error;

/// Errors raised by the geometric, optical and estimation primitives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point at or behind the camera aperture (depth {depth} m)")]
    BehindCamera { depth: f64 },

    #[error("footprint below one pixel (continuous area {pixels:.3} px)")]
    SubPixel { pixels: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("insufficient beacons: need two consecutive streetlights, got {0}")]
    InsufficientBeacons(usize),

    #[error("taillight pair incomplete for vehicle {0}")]
    Occluded(u16),

    #[error("zero SINR denominator: noise and interference both vanish")]
    ZeroDenominator,

    #[error("probability out of domain: {0}")]
    Domain(String),

    #[error("packet field `{field}` out of range: {value}")]
    FieldOutOfRange { field: &'static str, value: f64 },

    #[error("malformed packet: {0}")]
    Packet(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
