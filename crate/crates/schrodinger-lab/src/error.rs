use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: nx = {nx} but the unit band needs nx >= L/pi = {required:.2}")]
    GridTooCoarse { nx: usize, required: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("region contains no grid points")]
    EmptyRegion,
    #[error("non-finite sample encountered")]
    NonFinite,
    #[error("spectral mass leaks outside the declared support: relative leak {leak:.3e}")]
    BadSupport { leak: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("frame scale {frame} does not match field scale {field}")]
    ScaleMismatch { frame: f64, field: f64 },
    #[error("no bisecting polynomial found at partition step {step} (best residual {residual:.3e})")]
    BisectionNotFound { step: usize, residual: f64 },
    #[error("no non-singular zero points of P near the tube")]
    NoNonSingularPoints,
    #[error("every value lies below the pigeonhole floor")]
    AllBelowFloor,
    #[error("piece {piece} leaks outside its cap: relative leak {leak:.3e}")]
    SupportViolation { piece: usize, leak: f64 },
    #[error("cube norms are not essentially constant: max/min = {ratio:.3}")]
    NonUniformCubes { ratio: f64 },
    #[error("Fourier supports separated by {distance:.4}, need {required:.4}")]
    SeparationViolated { distance: f64, required: f64 },
    #[error("broadness precondition failed at every sampled point")]
    PreconditionFailed,
    #[error("{count} packets do not fit as disjoint tubes at R = {scale}")]
    TooManyPackets { count: usize, scale: f64 },
    #[error("construction degenerate: {0}")]
    ConstructionDegenerate(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
