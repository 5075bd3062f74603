//! Crate-wide error type.
//!
//! One enum covers the whole pipeline so that engine-level code can bubble
//! failures from any stage without wrapper layers. Variants are grouped by
//! origin: parameter validation, image handling, codec/channel state,
//! optimization, and file formats.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its documented domain.
    #[error("invalid {name}: {value} (expected {constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An observation timestamp lies in the future of the query time.
    #[error("time {now} precedes generation time {generation_time}; age is undefined")]
    TimeBeforeGeneration { now: f64, generation_time: f64 },

    /// Two buffers that must agree in shape do not.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    /// An operation received an empty collection it cannot work with.
    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },

    /// A symbol vector has no energy, so unit-power scaling is undefined.
    #[error("cannot power-normalize an all-zero symbol vector")]
    DegenerateCodeword,

    /// The requested bandwidth ratio maps to fewer than one channel symbol.
    #[error("bandwidth ratio {eta} yields {symbols} symbols for this image; at least 1 required")]
    RateTooLow { eta: f64, symbols: usize },

    /// A rate–distortion lookup was asked outside its supported domain.
    #[error("query outside rate-distortion model domain: {what} = {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    /// A rate–distortion table failed structural validation on ingest.
    #[error("malformed rate-distortion table: {detail}")]
    RdTable { detail: String },

    /// Gradient or parameter values stopped being finite.
    #[error("non-finite numerics in {context}: {detail}")]
    NonFinite { context: &'static str, detail: String },

    /// Training collapsed and was aborted by the divergence detector.
    #[error("training diverged: {detail}")]
    Diverged { detail: String },

    /// Analytic and numeric gradients disagreed beyond tolerance.
    #[error("gradient check failed: worst relative error {worst:.3e} exceeds {tolerance:.1e}")]
    GradientCheck { worst: f64, tolerance: f64 },

    /// A checkpoint file disagrees with the network it should restore.
    #[error("checkpoint mismatch: {detail}")]
    Checkpoint { detail: String },

    /// An image file's header could not be parsed.
    #[error("malformed image header in {path}: {detail}")]
    MalformedHeader { path: String, detail: String },

    /// An image file ended before its declared pixel payload.
    #[error("truncated image payload in {path}: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: String,
        expected: usize,
        found: usize,
    },

    /// The image is not 8-bit, the only depth the pipeline supports.
    #[error("unsupported sample depth in {path}: maxval {maxval} (only 8-bit, maxval <= 255)")]
    UnsupportedDepth { path: String, maxval: u32 },

    /// Configuration file rejected (unknown key, bad type, invalid value).
    #[error("configuration error: {message}")]
    Config { message: String },

    /// A CSV artifact violated its documented schema on read-back.
    #[error("malformed CSV in {path}: {detail}")]
    Csv { path: String, detail: String },

    /// Underlying filesystem failure.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// JSON (manifest, checkpoint header, sidecar) failure.
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
