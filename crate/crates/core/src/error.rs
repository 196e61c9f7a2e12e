use thiserror::Error;

/// Errors shared across the crate.  Every variant is a contract violation or
/// an unsatisfiable request; none of them occur on valid inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{n} is not prime")]
    NotPrime { n: u64 },

    #[error("modulus {n} must be an odd prime")]
    NotOddPrime { n: u64 },

    #[error("modulus {n} exceeds the supported bound 2^62")]
    ModulusTooLarge { n: u64 },

    #[error("division by zero in F_{p}[sqrt(n)]")]
    ZeroInversion { p: u64 },

    #[error("domain of size {domain} exceeds brute-force budget of {max} elements")]
    BudgetExceeded { domain: u64, max: u64 },

    #[error("map value {value} at index {index} escapes domain [0, {domain})")]
    EvalOutOfRange {
        index: u64,
        value: u64,
        domain: u64,
    },

    #[error("{zeta} has no square root in F_{p}^2; the twist leaves the quadratic extension")]
    NoSquareRoot { p: u64, zeta: String },

    #[error("zeta^(d-1) = {got}, expected 1: not a valid twist parameter for degree {d}")]
    InvalidTwist { d: u64, got: String },

    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("bad reduction at p = {p}: {what}")]
    BadReduction { p: u64, what: String },

    #[error("degree must be at least 2, got {d}")]
    DegreeTooSmall { d: u64 },

    #[error("cyclotomic order m_K = {m_k} must be even and positive")]
    InvalidCyclotomicOrder { m_k: u64 },

    #[error("congruence system has no solution")]
    UnsolvableSystem,

    #[error("polynomial is not conjugate to a Chebyshev polynomial")]
    NotConjugate,

    #[error("calibration probes disagree: {what}")]
    CalibrationFailure { what: String },

    #[error("even degree {d} requires the scaling factor itself, not just its square")]
    EvenDegreeNeedsRationalRoot { d: u64 },

    #[error("scaling factor must be nonzero")]
    ZeroScale,
}

pub type Result<T> = std::result::Result<T, Error>;
