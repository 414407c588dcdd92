use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument {value} outside the supported range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("conformal map degenerate: min |phi'| = {min_derivative:e} over {samples} samples")]
    DegenerateMap { min_derivative: f64, samples: usize },

    #[error("quadrature self-test failed: {0}")]
    Quadrature(String),

    #[error("non-positive density sample {value:e} at node {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("invalid measure node {index}: {reason}")]
    InvalidMeasure { index: usize, reason: String },

    #[error("measure has zero mass")]
    ZeroMass,

    #[error(
        "curvature stencil too coarse: error estimate {estimate:e} exceeds tolerance {tolerance:e} at node {index}"
    )]
    CurvatureResolution { index: usize, estimate: f64, tolerance: f64 },

    #[error("growth bound violated: G(r) - pi r^2 = {defect:e} at r = {radius}")]
    GrowthViolation { radius: f64, defect: f64 },

    #[error("profile h is not admissible: {0}")]
    InadmissibleProfile(String),

    #[error("renormalization did not converge: residual {residual:e} after {iterations} iterations")]
    RenormalizationFailed { residual: f64, iterations: usize },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("folding lost mass {lost:e} (relative), above the {tolerance:e} budget")]
    MassLoss { lost: f64, tolerance: f64 },

    #[error("cap search failed: best anisotropy {anisotropy:e} at l = {l}, p angle = {p_angle}")]
    CapSearchFailed { anisotropy: f64, l: f64, p_angle: f64 },

    #[error("mass matrix not positive definite")]
    IndefiniteMass,

    #[error("eigensolver did not converge after {iterations} iterations; residual trace {trace:?}")]
    EigenNotConverged { iterations: usize, trace: Vec<f64> },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("feature of width {feature} is not resolved by h = {h}; use h <= {required}")]
    UnresolvedFeature { feature: f64, h: f64, required: f64 },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, message: message.into() }
    }
}
