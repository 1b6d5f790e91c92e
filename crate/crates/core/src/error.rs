//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by dataset handling, density arithmetic, model fitting and
/// the shift-adaptation pipelines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Paired data violated a structural requirement (unequal columns,
    /// non-finite entries, empty input).
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// A sample set has no spread where spread is required (bandwidth
    /// selection, median heuristic).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Two grids that must share a step (or a grid layout) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// No datasets were supplied where at least one is required.
    #[error("empty input: at least one dataset required")]
    EmptyInput,

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    /// Too much of the retained spectral energy sat on clamped divisor bins;
    /// the deconvolution result would be dominated by the regularizer.
    #[error("deconvolution ill-conditioned: {clamped_energy:.4} of result spectral energy on clamped bins")]
    DeconvolutionIllConditioned { clamped_energy: f64 },

    /// The stochastic matrix is rank-deficient, so no unique input
    /// distribution reproduces the observed marginal.
    #[error("stochastic matrix not injective: numerical rank {rank} < {cols} columns")]
    NotInjective { rank: usize, cols: usize },

    /// The observed marginal is not producible by any input distribution on
    /// the simplex.
    #[error("infeasible marginal: best simplex-constrained residual {residual:.3e} exceeds tolerance")]
    InfeasibleMarginal { residual: f64 },

    /// Importance weights collapsed onto too few points.
    #[error("importance weights degenerate: effective sample size {ess:.2} < {min_ess}")]
    WeightDegenerate { ess: f64, min_ess: f64 },

    /// An observation has (numerically) zero probability under the model.
    #[error("zero evidence: {0}")]
    ZeroEvidence(String),

    #[error("no labeled data to train on")]
    NoLabeledData,

    #[error("too few nonzero differences: {got} < {needed}")]
    TooFewNonzero { got: usize, needed: usize },

    /// A parameter fell outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
