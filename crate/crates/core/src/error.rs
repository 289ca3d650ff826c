use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by kernel construction, the image pipeline, and the codecs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Weibull parameters alpha={alpha}, beta={beta}: both must be positive and finite")]
    InvalidParams { alpha: f64, beta: f64 },

    #[error("no interior mode: density is monotone for beta={beta} <= 1")]
    NoInteriorMode { beta: f64 },

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("kernel kind mismatch: expected {expected}, got {actual}")]
    KindMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("kernel size {kernel} exceeds image dimensions {width}x{height}")]
    KernelTooLarge {
        kernel: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid threshold rule: {0}")]
    InvalidThreshold(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("PGM parse error in {field} at byte {offset}: {reason}")]
    PgmParse {
        field: &'static str,
        offset: usize,
        reason: String,
    },

    #[error("kernel text parse error at line {line}: {reason}")]
    KernelParse { line: usize, reason: String },
}
