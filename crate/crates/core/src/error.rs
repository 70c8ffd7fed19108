use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or validating input data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid camera geometry: {0}")]
    Geometry(String),
    #[error("time {t} outside pose track [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("degenerate pose interval at t = {0} (duplicate timestamps)")]
    DegenerateInterval(f64),
    #[error("pose track needs at least two samples")]
    TooFewPoses,
    #[error("synthetic scene produced no in-bounds events")]
    EmptyScene,
    #[error("no events in the selected window")]
    EmptyWindow,
    #[error("invalid scene: {0}")]
    Scene(String),
}

/// Errors raised by loss evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("image has zero range; the pixel-value distribution is degenerate")]
    DegenerateDistribution,
    #[error("image has zero variance")]
    ZeroVariance,
    #[error("no occupied pixels in the timestamp image")]
    EmptySupport,
    #[error("image area is defined for non-negative images (found {0})")]
    NegativeValues(f64),
    #[error("image must be at least 3x3 for derivative losses")]
    TooSmall,
    #[error("loss `{0}` has no analytic gradient")]
    NoAnalyticGradient(&'static str),
    #[error("loss `{0}` needs a timestamp image, not an IWE")]
    NeedsTimestamps(&'static str),
    #[error("unknown loss name `{0}`")]
    UnknownName(String),
    #[error("invalid loss parameter: {0}")]
    Parameter(String),
}

/// Errors raised by image accumulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IweError {
    #[error("parameter vector has {got} entries, warp expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("bilinear splatting has no smooth gradient; use the Gaussian splat")]
    BilinearGradient,
    #[error("invalid splat options: {0}")]
    Options(String),
}

/// Errors raised by the optimizer and its oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("objective returned a non-finite value at theta = {theta:?}")]
    NonFinite { theta: Vec<f64> },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Iwe(#[from] IweError),
}

/// Top-level error for pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Iwe(#[from] IweError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("output {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
