//! Crate-wide error type.

use thiserror::Error;

/// Failures from the codec, preprocessing, and registration stages.
///
/// Each variant maps to a distinct CLI exit code; see the binary's
/// `--help` output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported PNM magic number `{0}` (expected P2, P3, P5 or P6)")]
    UnsupportedMagic(String),

    #[error("malformed PNM header: {0}")]
    MalformedHeader(String),

    #[error("truncated PNM pixel data: expected {expected} samples, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("image dimensions must be at least 1x1")]
    ZeroDimensions,

    #[error("image dimensions {width}x{height} exceed the 65535 pixel limit")]
    DimensionsTooLarge { width: usize, height: usize },

    #[error("PNM maxval {0} outside 1..=65535")]
    MaxvalOutOfRange(u32),

    #[error("pixel buffer holds {len} values, expected {width}x{height} = {expected}")]
    BadBufferLength {
        len: usize,
        width: usize,
        height: usize,
        expected: usize,
    },

    #[error("pixel value {0} outside [0, 1]")]
    PixelOutOfRange(f64),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("min-max normalization needs a non-empty sequence with max > min")]
    DegenerateRange,

    #[error("blank image: no ink pixels at the configured threshold")]
    BlankImage,

    #[error("no signal: every candidate angle produced the same correlation")]
    NoSignal,

    #[error("resize would produce an empty image")]
    DegenerateSize,

    #[error(
        "transformed content ({content_w}x{content_h}) does not fit a \
         {canvas_w}x{canvas_h} canvas at offset ({tx}, {ty})"
    )]
    ContentOverflow {
        content_w: usize,
        content_h: usize,
        canvas_w: usize,
        canvas_h: usize,
        tx: usize,
        ty: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
