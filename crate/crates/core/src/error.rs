use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::IPianoState;

pub type Result<T, E = FusionError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("grid must be at least 2x2, got {height}x{width}")]
    GridTooSmall { height: usize, width: usize },

    #[error("data length {got} does not match grid size {expected}")]
    DataLength { expected: usize, got: usize },

    #[error("non-finite value in {what} at row {row}, col {col}")]
    NonFinite { what: &'static str, row: usize, col: usize },

    #[error("shape mismatch in {what}: {left:?} vs {right:?}")]
    ShapeMismatch { what: &'static str, left: (usize, usize), right: (usize, usize) },

    #[error("channel count mismatch in {what}: {left} vs {right}")]
    ChannelMismatch { what: &'static str, left: usize, right: usize },

    #[error("{what} requires a 3-channel image, got {channels} channel(s)")]
    NeedsColor { what: &'static str, channels: usize },

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    ChannelCount(usize),

    #[error("{what} must be strictly positive, found {value} at channel {channel}, row {row}, col {col}")]
    NonPositive { what: &'static str, channel: usize, row: usize, col: usize, value: f64 },

    #[error("alpha value {value} outside [0,1] at row {row}, col {col}")]
    AlphaRange { row: usize, col: usize, value: f64 },

    #[error("mask value {value} is not 0 or 1 at row {row}, col {col}")]
    MaskValue { row: usize, col: usize, value: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { what: &'static str, iterations: usize, residual: f64 },

    #[error("backtracking exhausted at outer iteration {iteration} after {attempts} attempts (L1 = {l1:e}, L2 = {l2:e})")]
    BacktrackingExhausted { iteration: usize, attempts: usize, l1: f64, l2: f64, state: Box<IPianoState> },

    #[error("non-finite value in {what} at outer iteration {iteration}")]
    Divergence { what: &'static str, iteration: usize },

    #[error("failed to read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to write image {path}: {source}")]
    ImageWrite {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unsupported image format in {path}: {detail}")]
    UnsupportedImage { path: PathBuf, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FusionError {
    /// True for failures of the numerical solvers, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            FusionError::NotConverged { .. }
                | FusionError::BacktrackingExhausted { .. }
                | FusionError::Divergence { .. }
        )
    }
}
