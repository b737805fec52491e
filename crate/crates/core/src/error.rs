use thiserror::Error;

/// Pipeline stage names, attached to errors surfaced by [`crate::pipeline::run_uq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Design,
    Sampling,
    Fit,
    Moments,
    Sensitivity,
    Oracle,
    Training,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Design => "design",
            Stage::Sampling => "sampling",
            Stage::Fit => "fit",
            Stage::Moments => "moments",
            Stage::Sensitivity => "sensitivity",
            Stage::Oracle => "oracle",
            Stage::Training => "training",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum UqError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    #[error("value {value} outside the support of `{name}`")]
    OutsideSupport { name: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size {count} exceeds the configured cap of {cap}")]
    CapExceeded { count: u128, cap: usize },

    #[error("unsupported Smolyak level {0} (supported: 0, 1, 2)")]
    UnsupportedLevel(usize),

    #[error("{0} quadrature points requested; supported range is 1..=30")]
    QuadratureRange(usize),

    #[error("underdetermined least squares: {points} points for {terms} terms; use projection on a quadrature design")]
    Underdetermined { points: usize, terms: usize },

    #[error("design carries no quadrature weights")]
    MissingWeights,

    #[error("output variance is zero; Sobol' indices are undefined")]
    ZeroVariance,

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("kernel matrix is not positive definite at maximum jitter {0:e}")]
    NotPositiveDefinite(f64),

    #[error("grid file: {0}")]
    Grid(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<UqError>,
    },
}

impl UqError {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(UqError) -> UqError {
        move |source| UqError::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T, E = UqError> = std::result::Result<T, E>;
