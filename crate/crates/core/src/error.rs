use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("big-endian PFM files are not supported (scale field {0} > 0)")]
    BigEndianPfm(f32),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("ambiguous mask: byte value {value} at pixel {index} (expected 0 or 255)")]
    AmbiguousMask { value: u8, index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no candidate source views")]
    EmptyCandidates,

    #[error("loss mask is empty")]
    EmptyMask,

    #[error("stale render cache: {0}")]
    StaleCache(String),

    #[error("every pixel is pruned; inpainting needs at least one kept pixel")]
    NoBoundary,

    #[error("diffusion did not converge within {iters} iterations (last change {change:e})")]
    NotConverged { iters: usize, change: f64 },

    #[error("rate-distortion curves do not overlap in quality")]
    NonOverlapping,

    #[error("rate-distortion curve is not monotone: {0}")]
    NonMonotone(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("rank correlation undefined for a constant input")]
    ZeroVariance,

    #[error("unknown {kind} '{name}'")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
