use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the laboratory.
///
/// All variants describe a violated precondition on the inputs; none of
/// them are transient.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is too small; an odd prime p >= 3 is required")]
    ModulusTooSmall(u64),
    #[error("modulus {0} is composite")]
    CompositeModulus(u64),
    #[error("modulus 2 is even; an odd prime is required")]
    EvenModulus,
    #[error("{what} = {value} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("argument must be nonzero modulo p")]
    ZeroArgument,
    #[error("{d} does not divide p - 1 = {p_minus_one}")]
    NotADivisor { d: u64, p_minus_one: u64 },
    #[error("dilation by zero is not a bijection")]
    ZeroDilation,
    #[error("expected a trinomial, got {0} terms")]
    NotATrinomial(usize),
    #[error("coefficient must be nonzero modulo p")]
    ZeroCoefficient,
    #[error("set must be nonempty")]
    EmptySet,
    #[error("scalar must be nonzero modulo p")]
    ZeroScalar,
    #[error("every pair has a vanishing denominator; the ratio set is empty")]
    EmptyRatioSet,
    #[error("base {base} is divisible by p = {p}")]
    BaseDivisibleByP { base: i64, p: u64 },
    #[error("base {0} must satisfy |g| >= 2")]
    InvalidBase(i64),
    #[error("character index {j} is out of range for p = {p}")]
    InvalidCharacter { j: u64, p: u64 },
    #[error("weight table entry has modulus greater than one")]
    WeightOutOfRange,
    #[error("weight table shape does not match the subgroups")]
    WeightShape,
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
}
