use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point lies on or outside the open domain")]
    OutsideDomain,

    #[error("entry does not belong to this basis")]
    EntryMismatch,

    #[error("evaluation point too close to a retained eigenvalue pole at {0:.6e}")]
    AtPole(f64),

    #[error("contour segment too close to a pole or zero: phase step {step:.3} rad at {at}")]
    ContourTooClose { step: f64, at: String },

    #[error("enumeration budget exceeded ({terms:.3e} terms); use the integral-transform method")]
    EnumerationBudget { terms: f64 },

    #[error("enclosure [{lo:.9}, {hi:.9}] straddles the decision threshold {threshold}")]
    Undecided { lo: f64, hi: f64, threshold: f64 },

    #[error("quadrature tolerance {0:.3e} unreachable")]
    ToleranceUnreachable(f64),

    #[error("eigensolver failed to converge")]
    EigensolveFailed,

    #[error("point mass within one grid cell of the boundary; interpolation invalid")]
    PointMassNearBoundary,

    #[error("grid Peclet number {0:.3} >= 2; refine the grid or reduce the drift")]
    PecletTooLarge(f64),

    #[error("signal below noise over the whole fit window: {0}")]
    SignalBelowNoise(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
