use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series must have at least one coefficient")]
    EmptySeries,
    #[error("tail bound must be finite and nonnegative, got {0}")]
    InvalidTailBound(f64),
    #[error("series constant term must be {expected}, got {found}")]
    ConstantTerm { expected: f64, found: String },
    #[error("point |z| = {0} lies outside the open unit disk")]
    OutsideDisk(f64),
    #[error("radius {0} outside [0, 1)")]
    InvalidRadius(f64),
    #[error("circle grid must have at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error("k = {0} < 2 outside M_k")]
    RotationBound(f64),
    #[error("beta = {0} outside [0, 1)")]
    BetaRange(f64),
    #[error("sigma = {0} must be positive")]
    SigmaNotPositive(f64),
    #[error("j = 2 requires sigma - (n - 1) > 0, got sigma = {sigma}, n = {n}")]
    ShiftedOrder { sigma: f64, n: u32 },
    #[error("transform family must be 1 or 2, got {0}")]
    UnknownFamily(u8),
    #[error("operation requires n >= 1")]
    LevelZero,
    #[error("transforms belong to different families")]
    FamilyMismatch,
    #[error("measure mass {0} differs from 2")]
    MeasureMass(f64),
    #[error("measure total variation {variation} exceeds k = {k}")]
    MeasureVariation { variation: f64, k: f64 },
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("c + kappa = {0} must be positive")]
    IntegralOrder(f64),
    #[error("quadrature did not converge: error estimate {achieved:e} above target {target:e}")]
    Quadrature { achieved: f64, target: f64 },
    #[error("truncation error {err:e} at radius {radius} exceeds tolerance {tol:e}")]
    TruncationBudget { radius: f64, err: f64, tol: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
