use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small: {points} points per axis, need at least {required}")]
    GridTooSmall { points: usize, required: usize },
    #[error("grid function has {got} values, grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("grids do not match")]
    GridMismatch,
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("t must be dyadic k/2^n, got `{0}`")]
    NonDyadic(String),
    #[error("level {level} cannot resolve t = {t} (2^n t is not an integer)")]
    LevelTooCoarse { level: u32, t: String },
    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("growth bound |H(x)| <= K(|x|+|x|^2) violated at x = {x} (K = {k})")]
    GrowthBound { x: f64, k: f64 },
    #[error("sampled hamiltonian is not convex near p = {0}")]
    NotConvex(f64),
    #[error("search box must contain the origin and use at least {min} samples")]
    InvalidSearch { min: usize },
    #[error("conjugate table invariant violated: {0}")]
    ConjugateInvariant(String),
    #[error("admissible lambda set is empty (lambda window {window} excludes every finite L)")]
    EmptyAdmissibleSet { window: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative value {value} at node {index}; operator requires f >= 0")]
    NegativeInput { index: usize, value: f64 },
    #[error("input outside the ball B_R({radius}) with R = {r}: norm {norm}")]
    OutsideBall { r: f64, radius: f64, norm: f64 },
    #[error("support of f is not compact inside the grid")]
    SupportNotCompact,
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {message}")]
    Io { kind: std::io::ErrorKind, message: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io { kind: e.kind(), message: e.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
