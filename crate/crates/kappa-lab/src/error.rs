use thiserror::Error;

/// Errors produced by distribution constructors, estimators and the
/// Monte Carlo harness. Every variant names the violated constraint so
/// the CLI can surface it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("{name} must be {constraint}, got {value}")]
    Domain {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    /// An integer parameter is outside its admissible range.
    #[error("{name} must be {constraint}, got {value}")]
    Count {
        name: &'static str,
        constraint: &'static str,
        value: usize,
    },

    #[error("sample must contain at least one value")]
    EmptySample,

    #[error("sample values must be strictly positive and finite, got {value} at index {index}")]
    BadSampleValue { index: usize, value: f64 },

    /// The requested tail quantile cannot be resolved by the sample:
    /// floor(q * n) < 1, so the top group would be empty.
    #[error("quantile below resolution: floor(q*n) < 1 for q={q}, n={n}")]
    QuantileBelowResolution { q: f64, n: usize },

    /// Mixture weights must be nonnegative and sum to one.
    #[error("mixture weights must sum to 1 within 1e-12, got {sum}")]
    WeightSum { sum: f64 },

    #[error("weights and alphas must have equal nonzero length, got {weights} and {alphas}")]
    LengthMismatch { weights: usize, alphas: usize },

    /// A supplied population mean is too small for the fitted tail: the
    /// implied contribution would exceed one.
    #[error("mean {mean} is inconsistent with the tail at q={q}: contribution would be {value} > 1")]
    InconsistentMean { mean: f64, q: f64, value: f64 },

    /// The fitted tail index does not admit a finite mean, so no
    /// contribution can be evaluated from it.
    #[error("infinite-mean fit: alpha_hat = {alpha_hat} <= 1")]
    InfiniteMeanFit { alpha_hat: f64 },

    #[error("root finder failed: {0}")]
    RootFind(String),

    /// Scaling-law fits need strictly positive biases on a log scale.
    #[error("bias must be strictly positive to fit a scaling law, got {bias} at n={n}")]
    NonPositiveBias { n: usize, bias: f64 },

    #[error("scaling fit needs at least 3 points with distinct n, got {0}")]
    TooFewPoints(usize),

    #[error("run {run} failed for n={n}: {source}")]
    McRun {
        run: u64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    /// Filesystem or stream failure while emitting results.
    #[error("io failure on {path}: {message}")]
    Io { path: String, message: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
