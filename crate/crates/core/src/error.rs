use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("pole at this (g, s): factor {factor} vanishes")]
    Pole { factor: String },

    #[error("non-isolated fixed locus; out of scope ({0})")]
    NonIsolatedFixedLocus(String),

    #[error("confluent element; perturb or use limit formula")]
    ConfluentElement,

    #[error("weight 0 excluded from eta; route through h_T instead")]
    ZeroWeight,

    #[error("s = 1 is a pole of the Hurwitz zeta function")]
    HurwitzPole,

    #[error("extrapolation grid must be strictly decreasing, positive, with at least 4 points")]
    InvalidGrid,

    #[error("s must be positive for Abel damping (got {0})")]
    NonPositiveS(f64),

    #[error("series does not converge at s = {s}: tail bound {tail:e} exceeds tolerance")]
    Divergent { s: f64, tail: f64 },

    #[error("GR sector; route through gelfand_robbin (eigenvalue {0})")]
    GrSector(String),

    #[error("not L2; belongs to GR analysis (exponent {0})")]
    NotL2(String),

    #[error("degenerate pairing matrix")]
    DegeneratePairing,

    #[error("missing growth bound on coefficient stream")]
    MissingGrowthBound,

    #[error("zero eigenvalue in shifted spectrum at r = {r}, m = {m}")]
    ZeroEigenvalue { r: usize, m: usize },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("unit weight at smooth fixed point {0}")]
    UnitWeight(String),
}

pub type Result<T> = std::result::Result<T, Error>;
