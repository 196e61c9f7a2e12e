//! Exact counting and classification of periodic points for polynomial maps
//! reduced modulo primes.
//!
//! The central objects are the Chebyshev-like polynomials `T_d` normalized by
//! `T_d(x + 1/x) = x^d + 1/x^d`, whose periodic points over a finite field
//! are controlled by multiplicative orders in the field and its quadratic
//! extension.  Around them the crate provides:
//!
//! * [`numtheory`]: factorization, coprime parts, CRT, and prime streams;
//! * [`finitefield`]: arithmetic in `F_p` and `F_p[x]/(x^2 - n)`;
//! * [`dynamics`]: periodic sets and cycle structure of maps on finite sets;
//! * [`chebyshev`]: three independent periodic-point counting methods;
//! * [`conjugacy`]: detection of polynomials linearly conjugate to `±T_d`;
//! * [`classify`]: the liminf proportion of periodic points over all primes;
//! * [`witness`]: congruence systems forcing small proportions, and scans;
//! * [`randmap`]: a random-map baseline for the periodic-point count.
//!
//! All counts and ratios that are mathematically exact are kept exact
//! (integers and fractions); floating point appears only as a convenience
//! rendering.

pub mod chebyshev;
pub mod classify;
pub mod conjugacy;
pub mod dynamics;
mod error;
pub mod finitefield;
pub mod numtheory;
pub mod randmap;
pub mod rng;
pub mod witness;

pub use chebyshev::ExactRatio;
pub use classify::ClassificationOutcome;
pub use conjugacy::{ConjugacyOutcome, RationalPoly};
pub use dynamics::{BruteForceBudget, OrbitSummary, PeriodicMask};
pub use error::{Error, Result};
pub use finitefield::{PrimeFieldCtx, QuadExtElem};
pub use numtheory::Factorization;
pub use witness::{CongruenceSystem, ScanRecord};
