use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("need at least {required} observations, got {actual}")]
    TooFewObservations { required: usize, actual: usize },

    #[error("dataset needs at least one feature")]
    NoFeatures,

    #[error("non-finite value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },

    #[error("duplicate row id {0}")]
    DuplicateRowId(u64),

    #[error("dataset has no labels")]
    MissingLabels,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("norm exponent must be positive, got {0}")]
    InvalidNorm(f64),

    #[error("cannot parse norm exponent `{0}` (expected a positive real, `2^m`, or `inf`)")]
    NormParse(String),

    #[error("transform matrix is singular")]
    SingularTransform,

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error(
        "prevalence {requested} needs {needed} anomalous rows but only {available} exist \
         (max achievable prevalence {max_prevalence})"
    )]
    InsufficientAnomalies {
        requested: f64,
        needed: usize,
        available: usize,
        max_prevalence: f64,
    },

    #[error("AUC is undefined: scores contain a single class")]
    SingleClass,

    #[error("window size {ws} exceeds the {n} available observations")]
    WindowTooLarge { ws: usize, n: usize },

    #[error("no window retains both classes ({windows} windows, {skipped} skipped)")]
    NoEvaluableWindow { windows: usize, skipped: usize },
}
