//! Elementary number theory: primality, factorization, coprime parts,
//! valuations, CRT over possibly non-coprime moduli, and prime streams over
//! arithmetic progressions.
//!
//! Everything works on `u64` with `u128` intermediates, which covers the
//! whole supported range (moduli below `2^62`, hence `q^2 - 1` split into the
//! two factors `q - 1` and `q + 1` when a quadratic extension is involved).

use crate::error::{Error, Result};

/// `(a * b) mod m` without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `(base ^ exp) mod m` by binary exponentiation.
#[inline]
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    // float sqrt can be off by one on either side near 2^52 and above;
    // compare in u128 so candidates near 2^32 do not wrap
    while (x as u128) * (x as u128) > n as u128 {
        x -= 1;
    }
    while (x as u128 + 1) * (x as u128 + 1) <= n as u128 {
        x += 1;
    }
    x
}

fn miller_rabin_witness(n: u64, a: u64) -> bool {
    // returns true if `a` certifies n composite
    let a = a % n;
    if a == 0 {
        return false;
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return false;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return false;
        }
    }
    true
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // witness sets proven sufficient for each bound
    let witnesses: &[u64] = if n < 2_047 {
        &[2]
    } else if n < 1_373_653 {
        &[2, 3]
    } else if n < 25_326_001 {
        &[2, 3, 5]
    } else if n < 3_215_031_751 {
        &[2, 3, 5, 7]
    } else if n < 2_152_302_898_747 {
        &[2, 3, 5, 7, 11]
    } else if n < 3_474_749_660_383 {
        &[2, 3, 5, 7, 11, 13]
    } else if n < 341_550_071_728_321 {
        &[2, 3, 5, 7, 11, 13, 17]
    } else {
        &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    };
    !witnesses.iter().any(|&a| miller_rabin_witness(n, a))
}

/// A positive integer together with its prime factorization, exponents
/// ascending by prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product::<u64>()
    }

    /// Distinct primes, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }
}

const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Brent-cycle Pollard rho; returns a nontrivial factor of composite odd `n`.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    const BATCH: u64 = 128;
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u64;
        let mut anchor = 0u64;
        let mut batch_start = 0u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        while g == 1 {
            anchor = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                batch_start = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, anchor.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r <<= 1;
        }
        if g == n {
            // a whole batch collapsed to 0; replay it one step at a time
            g = 1;
            let mut v = batch_start;
            while g == 1 {
                v = f(v);
                g = gcd(anchor.abs_diff(v), n);
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factorization by trial division up to `10^6`, then Pollard rho with
/// Miller-Rabin as the primality oracle for what remains.
pub fn factorize(mut n: u64) -> Factorization {
    assert!(n >= 1, "factorize expects n >= 1");
    let original = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, e: u32, factors: &mut Vec<(u64, u32)>| {
        if e > 0 {
            factors.push((p, e));
        }
    };

    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e, &mut factors);
    }
    // wheel over 6k +/- 1
    let mut d = 7u64;
    let mut step = 4u64;
    while d <= TRIAL_DIVISION_BOUND && d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        push(d, e, &mut factors);
        d += step;
        step = 6 - step;
    }

    if n > 1 {
        if d * d > n || is_prime(n) {
            factors.push((n, 1));
        } else {
            // composite leftover with both prime factors above 10^6
            let mut stack = vec![n];
            let mut found: Vec<u64> = Vec::new();
            while let Some(m) = stack.pop() {
                if is_prime(m) {
                    found.push(m);
                } else {
                    let f = pollard_rho(m);
                    stack.push(f);
                    stack.push(m / f);
                }
            }
            found.sort_unstable();
            let mut i = 0;
            while i < found.len() {
                let p = found[i];
                let mut e = 0;
                while i < found.len() && found[i] == p {
                    e += 1;
                    i += 1;
                }
                factors.push((p, e));
            }
        }
    }

    factors.sort_unstable_by_key(|&(p, _)| p);
    let fact = Factorization {
        n: original,
        factors,
    };
    debug_assert_eq!(fact.product(), original);
    fact
}

/// Merge two factor lists by adding exponents of shared primes.
pub fn merge_factor_lists(a: &[(u64, u32)], b: &[(u64, u32)]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

/// Largest divisor of `a` coprime to `b`, by repeated gcd stripping.  No
/// factorization is needed, which keeps prime scans cheap.
pub fn coprime_part(mut a: u64, b: u64) -> u64 {
    assert!(a >= 1 && b >= 1);
    loop {
        let g = gcd(a, b);
        if g == 1 {
            return a;
        }
        a /= g;
    }
}

/// Product of the distinct primes dividing `n` (`radical(1) = 1`).
pub fn radical(n: u64) -> u64 {
    factorize(n).primes().product()
}

/// Exponent of the prime `p` in `n`.
pub fn valuation(mut n: u64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime { n: p });
    }
    assert!(n >= 1, "valuation expects n >= 1");
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Solve `x = r_i (mod m_i)` for all pairs, moduli not necessarily coprime.
/// Returns the least nonnegative solution and the lcm of the moduli, or
/// `None` when the system is inconsistent.
pub fn crt_solve(congruences: &[(i64, u64)]) -> Option<(u64, u64)> {
    let mut x: i128 = 0;
    let mut m: i128 = 1;
    for &(r, modulus) in congruences {
        assert!(modulus >= 1, "crt moduli must be positive");
        let mi = modulus as i128;
        let ri = ((r as i128 % mi) + mi) % mi;
        let (g, s, _) = egcd(m, mi);
        if (ri - x) % g != 0 {
            return None;
        }
        let lcm = m / g * mi;
        assert!(lcm <= u64::MAX as i128, "combined modulus exceeds u64");
        let diff = (ri - x) / g;
        let step = (diff % (mi / g) * s) % (mi / g);
        x = (x + m * step) % lcm;
        if x < 0 {
            x += lcm;
        }
        m = lcm;
    }
    Some((x as u64, m as u64))
}

/// Simple sieve of Eratosthenes plus segmented extraction of ranges.
#[derive(Debug, Clone)]
pub struct SmallSieve {
    limit: u64,
    primes: Vec<u64>,
}

impl SmallSieve {
    /// Sieve all primes up to `limit` inclusive.
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        let n = limit as usize + 1;
        let mut composite = vec![false; n];
        let mut primes = Vec::new();
        for i in 2..n {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j < n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        SmallSieve { limit, primes }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes in `[lo, hi]` by a segmented sieve.  Requires `hi <= limit^2`.
    pub fn primes_in_range(&self, lo: u64, hi: u64) -> Vec<u64> {
        assert!(
            self.limit.saturating_mul(self.limit) >= hi,
            "sieve base covers only up to {}^2",
            self.limit
        );
        if hi < 2 || hi < lo {
            return Vec::new();
        }
        let lo = lo.max(2);
        if hi <= self.limit {
            let a = self.primes.partition_point(|&p| p < lo);
            let b = self.primes.partition_point(|&p| p <= hi);
            return self.primes[a..b].to_vec();
        }
        let len = (hi - lo + 1) as usize;
        let mut composite = vec![false; len];
        for &p in &self.primes {
            if p * p > hi {
                break;
            }
            let start = (lo + p - 1) / p * p;
            let mut j = start.max(p * p);
            while j <= hi {
                composite[(j - lo) as usize] = true;
                j += p;
            }
        }
        (0..len)
            .filter(|&i| !composite[i])
            .map(|i| lo + i as u64)
            .collect()
    }
}

/// How `primes_in_progression` walks its range: dense ranges are sieved,
/// sparse progressions are stepped candidate by candidate under Miller-Rabin.
const PROGRESSION_SIEVE_CUTOFF: u64 = 1024;
const SEGMENT_LEN: u64 = 1 << 18;

enum StreamInner {
    Sieved {
        sieve: SmallSieve,
        next_lo: u64,
        buffer: std::vec::IntoIter<u64>,
    },
    Stepped {
        next: u64,
    },
}

/// Ordered stream of the primes `p` in `[start, limit]` with
/// `p = residue (mod modulus)`.  Independent per consumer.
pub struct PrimeStream {
    residue: u64,
    modulus: u64,
    limit: u64,
    inner: StreamInner,
}

/// All primes in `[start, limit]` congruent to `residue (mod modulus)`.
pub fn primes_in_progression(start: u64, residue: u64, modulus: u64, limit: u64) -> PrimeStream {
    assert!(modulus >= 1);
    let residue = residue % modulus;
    let inner = if modulus >= PROGRESSION_SIEVE_CUTOFF {
        // first candidate >= max(start, 2) in the progression
        let base = start.max(2);
        let rem = base % modulus;
        let next = if rem <= residue {
            base + (residue - rem)
        } else {
            base + (modulus - rem) + residue
        };
        StreamInner::Stepped { next }
    } else {
        StreamInner::Sieved {
            sieve: SmallSieve::new(isqrt(limit) + 1),
            next_lo: start.max(2),
            buffer: Vec::new().into_iter(),
        }
    };
    PrimeStream {
        residue,
        modulus,
        limit,
        inner,
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        match &mut self.inner {
            StreamInner::Stepped { next } => {
                while *next <= self.limit {
                    let candidate = *next;
                    *next += self.modulus;
                    if is_prime(candidate) {
                        return Some(candidate);
                    }
                }
                None
            }
            StreamInner::Sieved {
                sieve,
                next_lo,
                buffer,
            } => loop {
                if let Some(p) = buffer.next() {
                    return Some(p);
                }
                if *next_lo > self.limit {
                    return None;
                }
                let hi = (*next_lo + SEGMENT_LEN - 1).min(self.limit);
                let seg: Vec<u64> = sieve
                    .primes_in_range(*next_lo, hi)
                    .into_iter()
                    .filter(|&p| p % self.modulus == self.residue)
                    .collect();
                *next_lo = hi + 1;
                *buffer = seg.into_iter();
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    fn brute_coprime_part(a: u64, b: u64) -> u64 {
        // largest divisor of a coprime to b, by scanning all divisors
        let mut best = 1;
        for d in 1..=a {
            if a % d == 0 && gcd(d, b) == 1 {
                best = d;
            }
        }
        best
    }

    #[test]
    fn factorize_frozen_values() {
        assert_eq!(
            factorize(126).factors,
            vec![(2u64, 1u32), (3, 2), (7, 1)]
        );
        assert_eq!(factorize(1).factors, vec![]);
        assert_eq!(factorize(2).factors, vec![(2, 1)]);
        assert_eq!(factorize(97).factors, vec![(97, 1)]);
        assert_eq!(factorize(1 << 40).factors, vec![(2, 40)]);
    }

    #[test]
    fn factorize_large_semiprime_uses_rho() {
        // both factors above the trial-division bound
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let f = factorize(p * q);
        assert_eq!(f.factors, vec![(p, 1), (q, 1)]);
    }

    #[test]
    fn factorize_random_agrees_with_product_and_primality() {
        let mut rng = crate::rng::SplitMix64::new(11);
        for _ in 0..200 {
            let n = rng.next_below(1_000_000) + 1;
            let f = factorize(n);
            assert_eq!(f.product(), n);
            for &(p, _) in &f.factors {
                assert!(trial_division_is_prime(p), "bad prime {p} for {n}");
            }
            for w in f.factors.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
        }
    }

    #[test]
    fn coprime_part_frozen_values() {
        assert_eq!(coprime_part(4, 2), 1);
        assert_eq!(coprime_part(126, 6), 7);
        assert_eq!(coprime_part(1, 5), 1);
        assert_eq!(coprime_part(30, 1), 30);
    }

    #[test]
    fn coprime_part_matches_divisor_scan() {
        let mut rng = crate::rng::SplitMix64::new(5);
        for _ in 0..300 {
            let a = rng.next_below(500) + 1;
            let b = rng.next_below(60) + 1;
            assert_eq!(coprime_part(a, b), brute_coprime_part(a, b), "a={a} b={b}");
        }
    }

    proptest! {
        #[test]
        fn coprime_part_invariants(a in 1u64..100_000, b in 1u64..1000) {
            let r = coprime_part(a, b);
            prop_assert_eq!(a % r, 0);
            prop_assert_eq!(gcd(r, b), 1);
            // the removed part has no prime outside b
            let mut removed = a / r;
            while removed > 1 {
                let g = gcd(removed, b);
                prop_assert!(g > 1);
                removed /= g;
            }
        }

        #[test]
        fn coprime_part_multiplicative(a in 1u64..3000, b in 1u64..3000, c in 1u64..300) {
            prop_assume!(gcd(a, b) == 1);
            prop_assert_eq!(
                coprime_part(a * b, c),
                coprime_part(a, c) * coprime_part(b, c)
            );
        }

        #[test]
        fn coprime_part_depends_on_radical(a in 1u64..100_000, b in 1u64..1000) {
            prop_assert_eq!(coprime_part(a, b), coprime_part(a, radical(b)));
        }
    }

    #[test]
    fn radical_frozen_values() {
        assert_eq!(radical(12), 6);
        assert_eq!(radical(1), 1);
        assert_eq!(radical(97), 97);
        assert_eq!(radical(72), 6);
    }

    #[test]
    fn valuation_frozen_values() {
        assert_eq!(valuation(40, 2).unwrap(), 3);
        assert_eq!(valuation(40, 5).unwrap(), 1);
        assert_eq!(valuation(40, 3).unwrap(), 0);
        assert_eq!(valuation(1, 7).unwrap(), 0);
        assert!(valuation(40, 6).is_err());
    }

    #[test]
    fn crt_frozen_values() {
        assert_eq!(crt_solve(&[(1, 2), (1, 9), (-1, 8)]), Some((55, 72)));
        assert_eq!(crt_solve(&[(1, 2), (0, 4)]), None);
        assert_eq!(crt_solve(&[(1, 1)]), Some((0, 1)));
        assert_eq!(crt_solve(&[]), Some((0, 1)));
        assert_eq!(crt_solve(&[(3, 5), (3, 5)]), Some((3, 5)));
    }

    #[test]
    fn crt_solution_is_least_and_valid() {
        let mut rng = crate::rng::SplitMix64::new(17);
        for _ in 0..300 {
            let k = (rng.next_below(3) + 1) as usize;
            let congruences: Vec<(i64, u64)> = (0..k)
                .map(|_| {
                    let m = rng.next_below(30) + 1;
                    let r = rng.next_below(m) as i64;
                    (r, m)
                })
                .collect();
            let lcm = congruences
                .iter()
                .fold(1u64, |acc, &(_, m)| acc / gcd(acc, m) * m);
            // exhaustive oracle below the lcm
            let oracle = (0..lcm).find(|&x| {
                congruences
                    .iter()
                    .all(|&(r, m)| x % m == (r as u64) % m)
            });
            let got = crt_solve(&congruences);
            match (oracle, got) {
                (None, None) => {}
                (Some(x), Some((sol, modulus))) => {
                    assert_eq!(sol, x, "least solution for {congruences:?}");
                    assert_eq!(modulus, lcm);
                }
                other => panic!("mismatch {other:?} for {congruences:?}"),
            }
        }
    }

    #[test]
    fn crt_negative_residues_normalize() {
        let (x, m) = crt_solve(&[(-1, 7)]).unwrap();
        assert_eq!((x, m), (6, 7));
    }

    #[test]
    fn primality_frozen_values() {
        assert!(!is_prime(341)); // 11 * 31, base-2 Fermat pseudoprime
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(!is_prime(561)); // Carmichael
        assert!(is_prime(1_000_003));
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn primality_agrees_with_trial_division_to_one_million() {
        let sieve = SmallSieve::new(1_000_000);
        let mut expected = vec![false; 1_000_001];
        for &p in sieve.primes() {
            expected[p as usize] = true;
        }
        for n in 0..=1_000_000u64 {
            assert_eq!(is_prime(n), expected[n as usize], "n = {n}");
        }
    }

    #[test]
    fn prime_stream_frozen_values() {
        let got: Vec<u64> = primes_in_progression(2, 55, 72, 500).collect();
        assert_eq!(got, vec![127, 199, 271, 487]);
        let all: Vec<u64> = primes_in_progression(2, 0, 1, 10).collect();
        assert_eq!(all, vec![2, 3, 5, 7]);
        let none: Vec<u64> = primes_in_progression(2, 0, 4, 100).collect();
        assert_eq!(none, Vec::<u64>::new());
    }

    #[test]
    fn prime_stream_modes_agree() {
        // force both walk strategies over the same sparse progression
        let sieved: Vec<u64> = primes_in_progression(2, 55, 72, 20_000).collect();
        let mut stepped = Vec::new();
        let mut x = 55u64;
        while x <= 20_000 {
            if is_prime(x) {
                stepped.push(x);
            }
            x += 72;
        }
        assert_eq!(sieved, stepped);

        let wide: Vec<u64> = primes_in_progression(10, 1, 2048, 300_000).collect();
        let mut oracle = Vec::new();
        let mut y = 2049u64;
        while y <= 300_000 {
            if is_prime(y) {
                oracle.push(y);
            }
            y += 2048;
        }
        assert_eq!(wide, oracle);
    }

    #[test]
    fn segmented_sieve_matches_direct() {
        let sieve = SmallSieve::new(1000);
        let seg = sieve.primes_in_range(100_000, 101_000);
        for n in 100_000..=101_000u64 {
            assert_eq!(seg.contains(&n), trial_division_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn merge_factor_lists_adds_exponents() {
        let a = factorize(12); // 2^2 * 3
        let b = factorize(18); // 2 * 3^2
        assert_eq!(
            merge_factor_lists(&a.factors, &b.factors),
            vec![(2, 3), (3, 3)]
        );
    }

    #[test]
    fn isqrt_exact() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), (1u64 << 32) - 1);
    }
}
