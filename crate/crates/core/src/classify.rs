//! Classification of the liminf proportion of periodic points over primes.
//!
//! For the Chebyshev family the answer depends only on the degree `d` and on
//! `m_K`, the largest order of a root of unity in the base field (always
//! even, since -1 is a root of unity).  Ten cases cover everything: constant
//! and linear maps, non-Chebyshev maps, detected conjugates, and six
//! arithmetic cases splitting on the prime structure of `d` relative to
//! `m_K`.

use num_rational::Rational64;

use crate::conjugacy::{detect_chebyshev_conjugacy, ConjugacyOutcome, RationalPoly};
use crate::error::{Error, Result};
use crate::numtheory::{factorize, valuation};

/// Where a `(d, m_K)` pair or a polynomial landed, and the liminf value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationOutcome {
    /// Case 1 constants, 2 linear, 3 non-conjugate, 5-10 the Chebyshev
    /// cases.  A detected conjugate (case 4) delegates to a Chebyshev case,
    /// which becomes the `case_id` here with `via_case` set to 4.
    pub case_id: u8,
    /// Set to 4 when the value was reached through conjugacy detection.
    pub via_case: Option<u8>,
    /// The liminf proportion: one of 0, 1/4, 1/2, 1.
    pub value: Rational64,
    pub d: u64,
    pub m_k: u64,
}

fn outcome(case_id: u8, value: Rational64, d: u64, m_k: u64) -> ClassificationOutcome {
    ClassificationOutcome {
        case_id,
        via_case: None,
        value,
        d,
        m_k,
    }
}

/// Liminf proportion of periodic points of `+-T_d` over a field whose roots
/// of unity have maximal order `m_K`.
pub fn perinf_chebyshev(d: u64, m_k: u64) -> Result<ClassificationOutcome> {
    if m_k == 0 || m_k % 2 != 0 {
        return Err(Error::InvalidCyclotomicOrder { m_k });
    }
    if d < 2 {
        return Err(Error::DegreeTooSmall { d });
    }
    let fact = factorize(d);
    let half = Rational64::new(1, 2);
    let quarter = Rational64::new(1, 4);
    let zero = Rational64::from_integer(0);
    if fact.is_prime_power() {
        return Ok(if d % 2 == 1 {
            outcome(9, half, d, m_k)
        } else {
            outcome(10, quarter, d, m_k)
        });
    }
    let all_primes_divide = fact.primes().all(|p| m_k % p == 0);
    Ok(if !all_primes_divide {
        outcome(5, zero, d, m_k)
    } else if d % 2 == 1 {
        outcome(6, half, d, m_k)
    } else if valuation(m_k, 2)? >= 2 {
        outcome(7, quarter, d, m_k)
    } else {
        outcome(8, zero, d, m_k)
    })
}

/// Liminf proportion for an arbitrary polynomial over the rationals
/// (`m_K = 2`): constants never stabilize (case 1), linear maps are
/// eventually all-periodic (case 2), non-Chebyshev maps lose everything
/// (case 3), and detected conjugates inherit the Chebyshev answer (case 4).
pub fn perinf_polynomial(f: &RationalPoly) -> ClassificationOutcome {
    let d = f.degree();
    if d == 0 {
        return outcome(1, Rational64::from_integer(0), 0, 2);
    }
    if d == 1 {
        return outcome(2, Rational64::from_integer(1), 1, 2);
    }
    match detect_chebyshev_conjugacy(f).expect("degree is at least 2") {
        ConjugacyOutcome::NotConjugate => outcome(3, Rational64::from_integer(0), d, 2),
        ConjugacyOutcome::Conjugate { d, .. } => {
            let inner = perinf_chebyshev(d, 2).expect("d >= 2 and m_K = 2 are valid");
            ClassificationOutcome {
                via_case: Some(4),
                ..inner
            }
        }
    }
}
