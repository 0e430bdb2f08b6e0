use thiserror::Error;

/// Errors raised by the library.
///
/// Variants that name an inequality (`InequalityViolated`, `StageViolation`,
/// `LoopCapExceeded`) indicate a broken invariant rather than bad input: the
/// underlying statements are theorems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is below 3")]
    ModulusTooSmall(u64),
    #[error("modulus {p} exceeds the configured cap {cap}")]
    TooLarge { p: u64, cap: u64 },
    #[error("index {m} does not divide p - 1 = {order}")]
    IndexNotDividing { m: u64, order: u64 },
    #[error("discrete log of zero is undefined")]
    ZeroArgument,
    #[error("element {0} is not a unit mod p")]
    ZeroElement(u64),
    #[error("segment length {length} exceeds the order {order} of the generator")]
    SegmentTooLong { length: u64, order: u64 },
    #[error("segment is empty")]
    EmptySegment,
    #[error("support of a measure must be nonempty")]
    EmptySupport,
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("coefficient {magnitude} at xi={xi} lies within the guard band of threshold {threshold}")]
    BoundaryAmbiguity { xi: u64, magnitude: f64, threshold: f64 },
    #[error("eta={eta} is below the admissible minimum {min}")]
    EtaTooSmall { eta: f64, min: f64 },
    #[error("no admissible iteration i <= {cap}")]
    LoopCapExceeded { cap: u64 },
    #[error("k={k} exceeds the configured cap {cap}")]
    KCapExceeded { k: u64, cap: u64 },
    #[error("inequality violated: {0}")]
    InequalityViolated(String),
    #[error("hypotheses fail: {0}")]
    HypothesesFail(String),
    #[error("thresholds leave no usable set at stage {0}")]
    HypothesesEffectivelyEmpty(String),
    #[error("stage {0} violated")]
    StageViolation(String),
    #[error("invalid BGS instance: {0}")]
    InvalidInstance(String),
    #[error("no certified subset: {0}")]
    ExtractionFailed(String),
    #[error("subgroup is a segment, not a full subgroup")]
    NotFullSubgroup,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
