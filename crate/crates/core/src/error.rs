//! Error type shared by every analysis stage.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image could not be decoded: {0}")]
    BadImage(String),

    #[error("image has {pixels} pixels, limit is {limit}")]
    TooLarge { pixels: u64, limit: u64 },

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("kernel size {0} outside [1.5, 4.9]")]
    InvalidKernel(f64),

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("simplification left {vertices} vertices at epsilon {epsilon}")]
    DegenerateResult { vertices: usize, epsilon: f64 },

    #[error("polygon needs at least 3 distinct vertices")]
    DegeneratePolygon,

    #[error("both boxes have zero area")]
    ZeroArea,

    #[error("empty input")]
    EmptyInput,

    #[error("no points to fit")]
    NoPoints,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every pixel was removed by the extreme-value filter")]
    AllPixelsFiltered,

    #[error("no pixel lies within the region threshold of the cluster center")]
    EmptyRegion,

    #[error("coordinate ({x}, {y}) is outside the {width}x{height} image")]
    OutOfBounds { x: i64, y: i64, width: u32, height: u32 },

    #[error("clusters were extracted in different modes")]
    ModeMismatch,

    #[error("palette has no clusters")]
    EmptyPalette,

    #[error("segmentation provider unavailable: {0}")]
    ProviderUnavailable(String),

    #[error("segmentation found no objects")]
    NoDetections,

    #[error("invalid segmentation request: {0}")]
    InvalidRequest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
