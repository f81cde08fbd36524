use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library. Variants map one-to-one onto the
/// failure conditions of the individual operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid string spec: {0}")]
    InvalidSpec(String),
    #[error("tail bound unavailable: {0}")]
    TailBoundUnavailable(String),
    #[error("series does not converge at Re s = {re} (abscissa {abscissa})")]
    NotConvergent { re: f64, abscissa: f64 },
    #[error("enumeration budget of {0} groups exceeded")]
    BudgetExceeded(usize),
    #[error("invalid scaling ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid order {0}, expected n >= 1")]
    InvalidOrder(i64),
    #[error("truncated series unstable at s = {s}: {reason}")]
    TruncationUnstable { s: Complex64, reason: String },
    #[error("delta {delta} is below the admissible minimum {min}")]
    DeltaTooSmall { delta: f64, min: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("s = {s} lies within the guard radius of the pole {pole}")]
    PoleProximity { s: Complex64, pole: Complex64 },
    #[error("contour around {center} with radius {radius} meets the pole {pole}")]
    ContourCrossesPole {
        center: Complex64,
        radius: f64,
        pole: Complex64,
    },
    #[error("contour quadrature did not converge (last difference {0:e})")]
    NotConverged(f64),
    #[error("function vanishes on the contour near {0}")]
    ZeroOnContour(Complex64),
    #[error("winding number ambiguous: {0}")]
    Ambiguous(String),
    #[error("no pole catalog and the numerical search failed: {0}")]
    CatalogMissingAndSearchFailed(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("integral diverges at s = {0}")]
    DivergentAt(Complex64),
    #[error("argument {value} outside the valid range {range}")]
    OutOfRange { value: f64, range: String },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("folded periods disagree by {deviation:e} (tolerance {tolerance:e})")]
    PeriodMismatch { deviation: f64, tolerance: f64 },
    #[error("noise floor undetermined: {0}")]
    NoiseFloorUndetermined(String),
    #[error("residue conversion undefined at omega = N = {0}")]
    OmegaEqualsN(Complex64),
    #[error("Newton iteration diverged from seed {seed}")]
    NewtonDiverged { seed: Complex64 },
    #[error("empty union of lattices")]
    EmptyUnion,
    #[error("no real pole near D = {0} in the residue list")]
    MissingPrincipalPole(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
