use thiserror::Error;

use crate::poly::MAX_DEGREE;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix coefficients must be nonempty and share identical dimensions")]
    DimensionMismatch,
    #[error("all matrix coefficients are zero; the degree is undefined")]
    ZeroPolynomial,
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("projective point must be nonzero with finite components")]
    InvalidPoint,
    #[error("matrix inducing a Mobius transformation must be invertible with finite entries")]
    SingularMobius,
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("binomial upper argument {0} exceeds the supported maximum 30")]
    BinomialOverflow(usize),
    #[error("operation requires a square matrix polynomial")]
    NotSquare,
    #[error("operation requires degree >= 1")]
    DegreeZero,
    #[error("polynomial is singular or near-singular")]
    NearSingular,
    #[error("eigensolver failed to converge")]
    EigensolveFailed,
    #[error("eigenvalue lists must have equal lengths")]
    LengthMismatch,
    #[error("eigenvector must be nonzero")]
    ZeroVector,
    #[error("rho scaling requires degree 2 and nonzero extreme coefficients")]
    InvalidRhoInput,
    #[error("scaled polynomial missed the rho target: got {got:e}, want {want:e}")]
    RhoTargetMissed { got: f64, want: f64 },
    #[error("attainment construction requires k >= 1, n >= 2 and eps > 0")]
    InvalidAttainment,
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed polynomial document: {0}")]
    InvalidPolyDocument(String),
    #[error("unknown Mobius preset or malformed JSON: {0}")]
    MobiusSpec(String),
    #[error("CSV is missing required column `{0}`")]
    MissingColumn(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
