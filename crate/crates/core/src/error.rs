use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("cannot factor zero")]
    ZeroPolynomial,
    #[error("polynomial is reducible: {0}")]
    Reducible(String),
    #[error("invalid inertia type: {0}")]
    InvalidInertiaType(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("p divides d (p = {p}, d = {d})")]
    PDividesD { p: u64, d: u64 },
    #[error("degenerate fiber: t lies in {{0, 1}}")]
    DegenerateFiber,
    #[error("hyperelliptic Cartier needs odd p")]
    HyperellipticNeedsOddP,
    #[error("symbolic path needs p > d (p = {p}, d = {d}); use cartier_oracle")]
    UseOracle { p: u64, d: u64 },
    #[error("family is not generically ordinary at p = {0}")]
    NotGenericallyOrdinary(u64),
    #[error("inconsistent multiplicities inside an isomorphism class: {0}")]
    InconsistentMultiplicity(String),
    #[error("PGL2 symmetry present: {0}")]
    PglSymmetry(String),
    #[error("dihedral decomposition needs odd d, got {0}")]
    EvenDegree(u64),
    #[error("operation needs exactly four branch points, got {0}")]
    NeedsFourPoints(usize),
    #[error("genus {0} is out of range for this operation")]
    GenusOutOfRange(u64),
    #[error("prime {0} is out of range for this operation")]
    PrimeOutOfRange(u64),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
