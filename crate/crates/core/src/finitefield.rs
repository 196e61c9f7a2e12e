//! Arithmetic in `F_p` and in the quadratic extension `F_p[x]/(x^2 - n)`,
//! with `n` the least quadratic nonresidue mod `p`.
//!
//! The extension is where periodic points of the degree-`d` power map live:
//! the map `pi(beta) = beta + 1/beta` carries multiplicative structure in
//! `F_{p^2}` down to dynamics on `F_p`.  The context caches factorizations of
//! the group orders and subgroup generators, which every counting routine
//! needs repeatedly.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numtheory::{self, Factorization};
use crate::rng::SplitMix64;

/// Element `u + v * sqrt(n)` of `F_p[x]/(x^2 - n)`, coordinates reduced
/// mod `p`.  Base-field elements are exactly those with `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadExtElem {
    pub u: u64,
    pub v: u64,
}

impl QuadExtElem {
    pub const ZERO: QuadExtElem = QuadExtElem { u: 0, v: 0 };
    pub const ONE: QuadExtElem = QuadExtElem { u: 1, v: 0 };

    pub fn is_zero(&self) -> bool {
        self.u == 0 && self.v == 0
    }

    pub fn is_base(&self) -> bool {
        self.v == 0
    }
}

impl fmt::Display for QuadExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v == 0 {
            write!(f, "{}", self.u)
        } else {
            write!(f, "{} + {}*sqrt(n)", self.u, self.v)
        }
    }
}

/// Arithmetic context for one odd prime `p < 2^62`.
#[derive(Debug)]
pub struct PrimeFieldCtx {
    p: u64,
    nonresidue: u64,
    fact_p_minus_1: OnceLock<Factorization>,
    fact_p_plus_1: OnceLock<Factorization>,
    ext_order_factors: OnceLock<Vec<(u64, u32)>>,
    base_generator: OnceLock<u64>,
    unit_generator: OnceLock<QuadExtElem>,
}

pub const MODULUS_BOUND: u64 = 1 << 62;

impl PrimeFieldCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MODULUS_BOUND {
            return Err(Error::ModulusTooLarge { n: p });
        }
        if p == 2 || !numtheory::is_prime(p) {
            return Err(Error::NotOddPrime { n: p });
        }
        let exp = (p - 1) / 2;
        let nonresidue = (2..p)
            .find(|&c| numtheory::pow_mod(c, exp, p) == p - 1)
            .expect("every odd prime field has a quadratic nonresidue");
        Ok(PrimeFieldCtx {
            p,
            nonresidue,
            fact_p_minus_1: OnceLock::new(),
            fact_p_plus_1: OnceLock::new(),
            ext_order_factors: OnceLock::new(),
            base_generator: OnceLock::new(),
            unit_generator: OnceLock::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The least quadratic nonresidue, i.e. the `n` in `x^2 - n`.
    pub fn nonresidue(&self) -> u64 {
        self.nonresidue
    }

    /// `p^2 - 1`, the order of the extension's multiplicative group.
    pub fn ext_group_order(&self) -> u128 {
        (self.p as u128) * (self.p as u128) - 1
    }

    pub fn fact_p_minus_1(&self) -> &Factorization {
        self.fact_p_minus_1
            .get_or_init(|| numtheory::factorize(self.p - 1))
    }

    pub fn fact_p_plus_1(&self) -> &Factorization {
        self.fact_p_plus_1
            .get_or_init(|| numtheory::factorize(self.p + 1))
    }

    /// Factor list of `p^2 - 1`, merged from `p - 1` and `p + 1` so that no
    /// value ever outgrows `u64`.
    pub fn ext_order_factors(&self) -> &[(u64, u32)] {
        self.ext_order_factors.get_or_init(|| {
            numtheory::merge_factor_lists(
                &self.fact_p_minus_1().factors,
                &self.fact_p_plus_1().factors,
            )
        })
    }

    // ----- base field -----

    pub fn add_base(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn sub_base(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn neg_base(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul_base(&self, a: u64, b: u64) -> u64 {
        numtheory::mul_mod(a, b, self.p)
    }

    pub fn pow_base(&self, a: u64, e: u64) -> u64 {
        numtheory::pow_mod(a, e, self.p)
    }

    pub fn inv_base(&self, a: u64) -> Result<u64> {
        if a % self.p == 0 {
            return Err(Error::ZeroInversion { p: self.p });
        }
        Ok(self.pow_base(a % self.p, self.p - 2))
    }

    pub fn is_quadratic_residue(&self, a: u64) -> bool {
        let a = a % self.p;
        a != 0 && self.pow_base(a, (self.p - 1) / 2) == 1
    }

    /// Tonelli-Shanks square root in `F_p`; `None` for nonresidues.
    pub fn sqrt_base(&self, a: u64) -> Option<u64> {
        let p = self.p;
        let a = a % p;
        if a == 0 {
            return Some(0);
        }
        if !self.is_quadratic_residue(a) {
            return None;
        }
        if p % 4 == 3 {
            return Some(self.pow_base(a, (p + 1) / 4));
        }
        let s = (p - 1).trailing_zeros();
        let q = (p - 1) >> s;
        let mut m = s;
        let mut c = self.pow_base(self.nonresidue, q);
        let mut t = self.pow_base(a, q);
        let mut r = self.pow_base(a, (q + 1) / 2);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul_base(t2, t2);
                i += 1;
            }
            let b = self.pow_base(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mul_base(b, b);
            t = self.mul_base(t, c);
            r = self.mul_base(r, b);
        }
        Some(r)
    }

    // ----- quadratic extension -----

    pub fn embed(&self, c: u64) -> QuadExtElem {
        QuadExtElem { u: c % self.p, v: 0 }
    }

    pub fn add(&self, a: QuadExtElem, b: QuadExtElem) -> QuadExtElem {
        QuadExtElem {
            u: self.add_base(a.u, b.u),
            v: self.add_base(a.v, b.v),
        }
    }

    pub fn sub(&self, a: QuadExtElem, b: QuadExtElem) -> QuadExtElem {
        QuadExtElem {
            u: self.sub_base(a.u, b.u),
            v: self.sub_base(a.v, b.v),
        }
    }

    pub fn neg(&self, a: QuadExtElem) -> QuadExtElem {
        QuadExtElem {
            u: self.neg_base(a.u),
            v: self.neg_base(a.v),
        }
    }

    pub fn mul(&self, a: QuadExtElem, b: QuadExtElem) -> QuadExtElem {
        // (u1 + v1 s)(u2 + v2 s) = u1 u2 + n v1 v2 + (u1 v2 + u2 v1) s
        let uu = self.mul_base(a.u, b.u);
        let vv = self.mul_base(a.v, b.v);
        let uv = self.mul_base(a.u, b.v);
        let vu = self.mul_base(a.v, b.u);
        QuadExtElem {
            u: self.add_base(uu, self.mul_base(self.nonresidue, vv)),
            v: self.add_base(uv, vu),
        }
    }

    pub fn pow(&self, a: QuadExtElem, mut e: u128) -> QuadExtElem {
        let mut base = a;
        let mut acc = QuadExtElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Frobenius `beta -> beta^p`, which is coordinate negation on `v`.
    pub fn frobenius(&self, a: QuadExtElem) -> QuadExtElem {
        QuadExtElem {
            u: a.u,
            v: self.neg_base(a.v),
        }
    }

    /// Trace to `F_p`: `beta + beta^p = 2u`.
    pub fn trace_to_base(&self, a: QuadExtElem) -> u64 {
        self.add_base(a.u, a.u)
    }

    /// Norm to `F_p`: `beta * beta^p = u^2 - n v^2`.
    pub fn norm(&self, a: QuadExtElem) -> u64 {
        let u2 = self.mul_base(a.u, a.u);
        let nv2 = self.mul_base(self.nonresidue, self.mul_base(a.v, a.v));
        self.sub_base(u2, nv2)
    }

    pub fn inv(&self, a: QuadExtElem) -> Result<QuadExtElem> {
        if a.is_zero() {
            return Err(Error::ZeroInversion { p: self.p });
        }
        let n_inv = self.inv_base(self.norm(a))?;
        Ok(QuadExtElem {
            u: self.mul_base(a.u, n_inv),
            v: self.mul_base(self.neg_base(a.v), n_inv),
        })
    }

    /// Square root in the quadratic extension, or `None` when `z` is not a
    /// square there.  Reduces to base-field norm equations.
    pub fn sqrt_ext(&self, z: QuadExtElem) -> Option<QuadExtElem> {
        if z.is_zero() {
            return Some(QuadExtElem::ZERO);
        }
        if z.v == 0 {
            if let Some(r) = self.sqrt_base(z.u) {
                return Some(QuadExtElem { u: r, v: 0 });
            }
            // z = n * (z/n) with both factors nonresidues, so z/n is a
            // residue and sqrt(z) = sqrt(z/n) * sqrt(n)
            let quotient = self.mul_base(z.u, self.inv_base(self.nonresidue).ok()?);
            let t = self.sqrt_base(quotient)?;
            return Some(QuadExtElem { u: 0, v: t });
        }
        // w = a + b s with a^2 + n b^2 = z.u and 2ab = z.v; then
        // (a^2) and (n b^2) are the roots of y^2 - z.u y + n (z.v/2)^2,
        // whose discriminant is the norm of z.
        let m = self.sqrt_base(self.norm(z))?;
        let half = self.inv_base(2).expect("p is odd");
        let t1 = self.mul_base(self.add_base(z.u, m), half);
        let t2 = self.mul_base(self.sub_base(z.u, m), half);
        for t in [t1, t2] {
            if let Some(a) = self.sqrt_base(t) {
                if a == 0 {
                    continue;
                }
                let b = self.mul_base(z.v, self.inv_base(self.mul_base(2, a)).ok()?);
                let w = QuadExtElem { u: a, v: b };
                debug_assert_eq!(self.mul(w, w), z);
                return Some(w);
            }
        }
        None
    }

    /// Multiplicative order of `beta != 0`; divides `p^2 - 1`.
    pub fn element_order(&self, beta: QuadExtElem) -> Result<u128> {
        if beta.is_zero() {
            return Err(Error::ZeroInversion { p: self.p });
        }
        let mut order = self.ext_group_order();
        for &(ell, e) in self.ext_order_factors() {
            for _ in 0..e {
                if order % ell as u128 == 0
                    && self.pow(beta, order / ell as u128) == QuadExtElem::ONE
                {
                    order /= ell as u128;
                } else {
                    break;
                }
            }
        }
        Ok(order)
    }

    /// `pi(beta) = beta + 1/beta`; rejects `beta = 0`.
    pub fn pi_map(&self, beta: QuadExtElem) -> Result<QuadExtElem> {
        Ok(self.add(beta, self.inv(beta)?))
    }

    /// All `beta` in the extension with `beta + 1/beta = alpha`, i.e. the
    /// roots of `x^2 - alpha x + 1` that lie in `F_{p^2}`.  Returns 1 element
    /// exactly for `alpha = +-2`, else 0 or 2, sorted for determinism.
    pub fn pi_fiber(&self, alpha: QuadExtElem) -> Vec<QuadExtElem> {
        let four = self.embed(4);
        let disc = self.sub(self.mul(alpha, alpha), four);
        let Some(s) = self.sqrt_ext(disc) else {
            return Vec::new();
        };
        let half = self.inv_base(2).expect("p is odd");
        let halve = |x: QuadExtElem| QuadExtElem {
            u: self.mul_base(x.u, half),
            v: self.mul_base(x.v, half),
        };
        if s.is_zero() {
            return vec![halve(alpha)];
        }
        let mut roots = vec![halve(self.add(alpha, s)), halve(self.sub(alpha, s))];
        roots.sort_unstable();
        roots
    }

    /// A generator of `F_p^*`, found by seeded sampling and exact-order
    /// verification against the factorization of `p - 1`.
    pub fn base_generator(&self) -> u64 {
        *self.base_generator.get_or_init(|| {
            let p = self.p;
            if p == 3 {
                return 2;
            }
            let fact = self.fact_p_minus_1();
            let mut rng = SplitMix64::stream(0x6261_7365_6765_6e00, p);
            loop {
                let c = rng.next_below(p - 2) + 2;
                let is_generator = fact
                    .primes()
                    .all(|ell| self.pow_base(c, (p - 1) / ell) != 1);
                if is_generator {
                    return c;
                }
            }
        })
    }

    /// A generator of the norm-one subgroup `{beta : beta^(p+1) = 1}` of
    /// order `p + 1`, found by projecting seeded samples with `beta^(p-1)`
    /// and verifying the order exactly.
    pub fn unit_subgroup_generator(&self) -> QuadExtElem {
        *self.unit_generator.get_or_init(|| {
            let p = self.p;
            let fact = self.fact_p_plus_1();
            let mut rng = SplitMix64::stream(0x756e_6974_6765_6e00, p);
            loop {
                let candidate = QuadExtElem {
                    u: rng.next_below(p),
                    v: rng.next_below(p),
                };
                if candidate.is_zero() {
                    continue;
                }
                let g = self.pow(candidate, (p - 1) as u128);
                let full_order = fact
                    .primes()
                    .all(|ell| self.pow(g, ((p + 1) / ell) as u128) != QuadExtElem::ONE);
                if full_order {
                    debug_assert_eq!(self.pow(g, (p + 1) as u128), QuadExtElem::ONE);
                    return g;
                }
            }
        })
    }
}
