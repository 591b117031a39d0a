use thiserror::Error;

/// Structured failures raised by the numeric routines.
///
/// Values are carried as `f64` regardless of the scalar type in use so the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta {theta} lies outside the tilt domain ({lo}, {hi})")]
    ThetaOutOfDomain { theta: f64, lo: f64, hi: f64 },

    #[error("component index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unsupported cumulant order {0} (max 6)")]
    UnsupportedOrder(usize),

    #[error("unsupported Hermite degree {0} (max 9)")]
    UnsupportedDegree(usize),

    #[error("unsupported Edgeworth order {0} (expected 3, 4 or 5)")]
    UnsupportedEdgeworthOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("compact [{lo}, {hi}] is not strictly inside the tilt domain")]
    CompactOutsideTheta { lo: f64, hi: f64 },

    #[error("index range {p}..={q} is empty or invalid")]
    EmptyRange { p: usize, q: usize },

    #[error("target mean {target} lies outside the support ({lo}, {hi})")]
    TargetOutsideSupport { target: f64, lo: f64, hi: f64 },

    #[error("could not bracket the tilt for target {target} after {expansions} expansions")]
    BracketFailure { target: f64, expansions: usize },

    #[error("aggregate variance {0} is not positive")]
    DegenerateVariance(f64),

    #[error("tail range {from}..={n} is empty")]
    EmptyTailRange { from: usize, n: usize },

    #[error("adaptive quadrature failed to converge (estimate {estimate}, error {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("residual mean {residual_mean} at step {step} lies outside the support")]
    ResidualMeanOutOfSupport { step: usize, residual_mean: f64 },

    #[error("kernel mass underflows on the sampling grid")]
    GridUnderflow,

    #[error("grid too coarse: halving the spacing moved the density by {0}")]
    GridTooCoarse(f64),

    #[error("conditioning density is zero at the requested point")]
    ZeroDenominator,

    #[error("family contains non-Gaussian components")]
    NotGaussianFamily,

    #[error("non-finite log-density encountered at sample {0}")]
    NonFiniteLogDensity(usize),

    #[error("all importance weights are zero")]
    DegenerateWeights,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
