//! Constructive side of the classification: congruence systems whose prime
//! solutions realize small (or large) periodic proportions, a witness-prime
//! finder, and a running-minimum scanner for the ratio
//! `(r(q-1,d) + r(q+1,d)) / (2q)` along primes `q = 1 (mod m_K)`.

use std::path::Path;

use rayon::prelude::*;

use crate::chebyshev::ExactRatio;
use crate::classify::perinf_chebyshev;
use crate::error::{Error, Result};
use crate::numtheory::{coprime_part, crt_solve, factorize, primes_in_progression, valuation};

/// Largest combined modulus a witness system is allowed to reach; keeps
/// witness searches at desk scale.
pub const MAX_SEARCH_MODULUS: u64 = 100_000_000;

/// A list of congruences `x = a_i (mod n_i)` with its combined solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceSystem {
    /// `(residue, modulus)` pairs; residues may be negative (e.g. -1).
    pub congruences: Vec<(i64, u64)>,
    /// `(x, M)` with `x` the least nonnegative solution mod `M = lcm(n_i)`,
    /// when the system is solvable.
    pub solution: Option<(u64, u64)>,
}

impl CongruenceSystem {
    pub fn new(congruences: Vec<(i64, u64)>) -> Self {
        let solution = crt_solve(&congruences);
        CongruenceSystem {
            congruences,
            solution,
        }
    }

    /// Direct recheck that every `n_i` divides `p - a_i`, independent of the
    /// solver and the prime sieve.
    pub fn is_satisfied_by(&self, p: u64) -> bool {
        self.congruences.iter().all(|&(a, n)| {
            let n = n as i128;
            (p as i128 - a as i128).rem_euclid(n) == 0
        })
    }
}

/// One scanned prime (or prime power, when enabled): the two coprime parts,
/// their ratio, and the minimum seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanRecord {
    pub q: u64,
    pub r_minus: u64,
    pub r_plus: u64,
    pub ratio: ExactRatio,
    pub running_min: ExactRatio,
}

fn record_for(q: u64, d: u64, running: Option<ExactRatio>) -> ScanRecord {
    let r_minus = coprime_part(q - 1, d);
    let r_plus = coprime_part(q + 1, d);
    let ratio = ExactRatio::new(r_minus + r_plus, 2 * q);
    let running_min = match running {
        Some(m) if m <= ratio => m,
        _ => ratio,
    };
    ScanRecord {
        q,
        r_minus,
        r_plus,
        ratio,
        running_min,
    }
}

fn max_exponent_within(p: u64, want: u32) -> u32 {
    let mut m = want;
    while m > 1 && (p as u128).pow(m) > MAX_SEARCH_MODULUS as u128 {
        m -= 1;
    }
    m
}

/// Build the congruence system whose prime solutions realize the
/// classification value of `(d, m_K)`.  Every system includes
/// `x = 1 (mod m_K)`.  `m1` is the exponent on the main prime-power
/// constraint (raised to at least the multiplicity of that prime in `m_K`),
/// `m2` the exponent on the `x = -1` constraint where the case has one.
/// Exponents are lowered if needed to keep the combined modulus within
/// [`MAX_SEARCH_MODULUS`].
pub fn build_witness_system(d: u64, m_k: u64, m1: u32, m2: u32) -> Result<CongruenceSystem> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::UnsolvableSystem);
    }
    let class = perinf_chebyshev(d, m_k)?;
    let primes: Vec<u64> = factorize(d).primes().collect();
    let smallest_odd = primes.iter().copied().find(|&p| p % 2 == 1);

    // (residue, prime, requested exponent, minimal exponent)
    let mut constraints: Vec<(i64, u64, u32, u32)> = Vec::new();
    match class.case_id {
        6 | 9 => {
            let p = primes[0];
            let floor = valuation(m_k, p)?.max(1);
            constraints.push((1, p, m1.max(floor), floor));
        }
        7 | 10 => {
            let floor = valuation(m_k, 2)?.max(1);
            constraints.push((1, 2, m1.max(floor), floor));
        }
        8 => {
            let p = smallest_odd.expect("even non-prime-power degree has an odd prime");
            let floor = valuation(m_k, p)?.max(1);
            constraints.push((1, p, m1.max(floor), floor));
            constraints.push((-1, 2, m2, 1));
        }
        5 => {
            let (p1, p2) = if d % 2 == 0 && valuation(m_k, 2)? <= 1 {
                (smallest_odd.expect("even non-prime-power degree"), 2)
            } else {
                let p2 = primes
                    .iter()
                    .copied()
                    .find(|&p| m_k % p != 0)
                    .expect("some prime of d misses m_K in this case");
                let p1 = primes
                    .iter()
                    .copied()
                    .find(|&p| p != p2)
                    .expect("d has at least two primes");
                (p1, p2)
            };
            let floor = valuation(m_k, p1)?.max(1);
            constraints.push((1, p1, m1.max(floor), floor));
            constraints.push((-1, p2, m2, 1));
        }
        other => unreachable!("chebyshev classification produced case {other}"),
    }

    // lower exponents from the largest modulus down until the combined
    // modulus fits
    let mut exps: Vec<u32> = constraints
        .iter()
        .map(|&(_, p, want, _)| max_exponent_within(p, want))
        .collect();
    loop {
        let mut congruences = vec![(1i64, m_k)];
        for (i, &(a, p, _, _)) in constraints.iter().enumerate() {
            congruences.push((a, p.pow(exps[i])));
        }
        let system = CongruenceSystem::new(congruences);
        match system.solution {
            Some((_, m)) if m <= MAX_SEARCH_MODULUS => return Ok(system),
            Some((_, m)) => {
                let shrinkable = (0..constraints.len())
                    .filter(|&i| exps[i] > constraints[i].3)
                    .max_by_key(|&i| (constraints[i].1 as u128).pow(exps[i]));
                match shrinkable {
                    Some(i) => exps[i] -= 1,
                    None => return Err(Error::ModulusTooLarge { n: m }),
                }
            }
            None => return Err(Error::UnsolvableSystem),
        }
    }
}

/// One witness prime with its ratio record and the independent recheck.
#[derive(Debug, Clone)]
pub struct WitnessPrime {
    pub p: u64,
    pub record: ScanRecord,
    pub recheck_passed: bool,
}

/// Witness primes found for a system, in ascending order.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub d: u64,
    pub witnesses: Vec<WitnessPrime>,
    /// Whether the requested count was reached below the limit.
    pub complete: bool,
}

/// The first `count` primes solving the system, up to `limit`, each passing
/// the divisibility recheck.  Fewer may be returned (flagged in the report).
pub fn find_witness_primes(
    system: &CongruenceSystem,
    d: u64,
    count: usize,
    limit: u64,
) -> Result<WitnessReport> {
    let (x, m) = system.solution.ok_or(Error::UnsolvableSystem)?;
    let mut witnesses = Vec::new();
    let mut running = None;
    for p in primes_in_progression(3, x, m, limit) {
        if witnesses.len() == count {
            break;
        }
        let record = record_for(p, d, running);
        running = Some(record.running_min);
        witnesses.push(WitnessPrime {
            p,
            record,
            recheck_passed: system.is_satisfied_by(p),
        });
    }
    let complete = witnesses.len() == count;
    Ok(WitnessReport {
        d,
        witnesses,
        complete,
    })
}

/// Parameters for a running-minimum scan.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub d: u64,
    pub m_k: u64,
    pub limit: u64,
    /// First prime to consider (for resumed scans).
    pub start: u64,
    /// Running minimum carried in from a previous partial scan.
    pub initial_min: Option<ExactRatio>,
    /// Scan all odd primes instead of only `1 (mod m_K)`; over the
    /// rationals (`m_K = 2`) the two streams coincide.
    pub unrestricted: bool,
}

impl ScanConfig {
    pub fn new(d: u64, m_k: u64, limit: u64) -> Self {
        ScanConfig {
            d,
            m_k,
            limit,
            start: 3,
            initial_min: None,
            unrestricted: false,
        }
    }
}

/// Scan primes `q = 1 (mod m_K)`, `q` odd, up to the limit, emitting one
/// record per prime in ascending order, and return the final running
/// minimum.  Output is identical regardless of the worker pool shape: the
/// coprime parts are computed in parallel, the fold is sequential.
pub fn liminf_scan(
    cfg: &ScanConfig,
    mut emit: impl FnMut(&ScanRecord),
) -> Result<Option<ExactRatio>> {
    if cfg.d < 2 {
        return Err(Error::DegreeTooSmall { d: cfg.d });
    }
    if cfg.m_k == 0 || cfg.m_k % 2 != 0 {
        return Err(Error::InvalidCyclotomicOrder { m_k: cfg.m_k });
    }
    let modulus = if cfg.unrestricted { 2 } else { cfg.m_k };
    let primes: Vec<u64> =
        primes_in_progression(cfg.start.max(3), 1, modulus, cfg.limit).collect();
    let d = cfg.d;
    let parts: Vec<(u64, u64, u64)> = primes
        .par_iter()
        .map(|&q| (q, coprime_part(q - 1, d), coprime_part(q + 1, d)))
        .collect();
    let mut running = cfg.initial_min;
    for (q, r_minus, r_plus) in parts {
        let ratio = ExactRatio::new(r_minus + r_plus, 2 * q);
        let running_min = match running {
            Some(m) if m <= ratio => m,
            _ => ratio,
        };
        running = Some(running_min);
        emit(&ScanRecord {
            q,
            r_minus,
            r_plus,
            ratio,
            running_min,
        });
    }
    Ok(running)
}

/// Resumable-scan state: the scan parameters, the last prime processed, and
/// the running minimum at that point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub d: u64,
    pub m_k: u64,
    pub last_q: u64,
    pub min_num: u64,
    pub min_den: u64,
}

/// Plain-text checkpoint: a tagged header line, then `last_q min_num min_den`.
pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> std::io::Result<()> {
    std::fs::write(
        path,
        format!(
            "# perred scan d={} mk={}\n{} {} {}\n",
            ck.d, ck.m_k, ck.last_q, ck.min_num, ck.min_den
        ),
    )
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        pos: 0,
        msg: format!("cannot read checkpoint: {e}"),
    })?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let rest = header.strip_prefix("# perred scan ").ok_or(Error::Parse {
        pos: 0,
        msg: "not a scan checkpoint".to_string(),
    })?;
    let mut d = None;
    let mut m_k = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("d=") {
            d = v.parse::<u64>().ok();
        } else if let Some(v) = field.strip_prefix("mk=") {
            m_k = v.parse::<u64>().ok();
        }
    }
    let (Some(d), Some(m_k)) = (d, m_k) else {
        return Err(Error::Parse {
            pos: 0,
            msg: "checkpoint header missing d= or mk=".to_string(),
        });
    };
    let data = lines.next().ok_or(Error::Parse {
        pos: 1,
        msg: "missing checkpoint data line".to_string(),
    })?;
    let fields: Vec<u64> = data
        .split_whitespace()
        .map(|f| f.parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            pos: 1,
            msg: format!("bad checkpoint field: {e}"),
        })?;
    if fields.len() != 3 || fields[2] == 0 {
        return Err(Error::Parse {
            pos: 1,
            msg: "checkpoint data line must be `last_q min_num min_den`".to_string(),
        });
    }
    Ok(Checkpoint {
        d,
        m_k,
        last_q: fields[0],
        min_num: fields[1],
        min_den: fields[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn big(n: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio_rational(r: ExactRatio) -> BigRational {
        BigRational::new(BigInt::from(r.num), BigInt::from(r.den))
    }

    #[test]
    fn frozen_case5_system() {
        let sys = build_witness_system(6, 2, 2, 3).unwrap();
        assert_eq!(sys.congruences, vec![(1, 2), (1, 9), (-1, 8)]);
        assert_eq!(sys.solution, Some((55, 72)));
    }

    #[test]
    fn frozen_case9_system() {
        let sys = build_witness_system(3, 2, 4, 4).unwrap();
        assert_eq!(sys.congruences, vec![(1, 2), (1, 81)]);
        assert_eq!(sys.solution, Some((1, 162)));
    }

    #[test]
    fn frozen_case10_system() {
        let sys = build_witness_system(4, 2, 5, 4).unwrap();
        assert_eq!(sys.congruences, vec![(1, 2), (1, 32)]);
        assert_eq!(sys.solution, Some((1, 32)));
    }

    #[test]
    fn enlarged_case5_system() {
        let sys = build_witness_system(6, 2, 4, 8).unwrap();
        assert_eq!(sys.congruences, vec![(1, 2), (1, 81), (-1, 256)]);
        assert_eq!(sys.solution, Some((12799, 20736)));
        assert!(sys.is_satisfied_by(12799 + 20736));
    }

    #[test]
    fn case7_and_case8_systems() {
        let sys = build_witness_system(6, 12, 3, 4).unwrap();
        // v2(12) = 2 keeps the floor at 2; requested 3 wins
        assert_eq!(sys.congruences, vec![(1, 12), (1, 8)]);
        assert_eq!(sys.solution, Some((1, 24)));

        let sys = build_witness_system(6, 6, 4, 4).unwrap();
        assert_eq!(sys.congruences, vec![(1, 6), (1, 81), (-1, 16)]);
        let (x, m) = sys.solution.unwrap();
        assert_eq!(m, 1296);
        assert!(sys.is_satisfied_by(x + 2 * m));
        assert_eq!(x % 81, 1);
        assert_eq!(x % 16, 15);
    }

    #[test]
    fn oversized_exponents_are_clamped() {
        let sys = build_witness_system(6, 2, 30, 30).unwrap();
        let (_, m) = sys.solution.unwrap();
        assert!(m <= MAX_SEARCH_MODULUS);
        // the constraint structure is preserved
        assert_eq!(sys.congruences.len(), 3);
        assert_eq!(sys.congruences[0], (1, 2));
    }

    #[test]
    fn frozen_witnesses_for_case5() {
        let sys = build_witness_system(6, 2, 2, 3).unwrap();
        let report = find_witness_primes(&sys, 6, 4, 500).unwrap();
        assert!(report.complete);
        let ps: Vec<u64> = report.witnesses.iter().map(|w| w.p).collect();
        assert_eq!(ps, vec![127, 199, 271, 487]);
        for w in &report.witnesses {
            assert!(w.recheck_passed, "p={}", w.p);
        }
        let first = &report.witnesses[0].record;
        assert_eq!((first.r_minus, first.r_plus), (7, 1));
        assert_eq!((first.ratio.num, first.ratio.den), (8, 254));
        let second = &report.witnesses[1].record;
        assert_eq!((second.ratio.num, second.ratio.den), (36, 398));
        // 127's ratio remains the minimum
        let last = &report.witnesses[3].record;
        assert_eq!((last.running_min.num, last.running_min.den), (8, 254));
    }

    #[test]
    fn frozen_witnesses_for_case9() {
        let sys = build_witness_system(3, 2, 4, 4).unwrap();
        let report = find_witness_primes(&sys, 3, 3, 1000).unwrap();
        assert!(report.complete);
        let ps: Vec<u64> = report.witnesses.iter().map(|w| w.p).collect();
        assert_eq!(ps, vec![163, 487, 811]);
        let at_487 = &report.witnesses[1].record;
        assert_eq!((at_487.ratio.num, at_487.ratio.den), (490, 974));
    }

    #[test]
    fn incomplete_report_is_flagged() {
        let sys = build_witness_system(6, 2, 2, 3).unwrap();
        let report = find_witness_primes(&sys, 6, 5, 130).unwrap();
        assert!(!report.complete);
        assert_eq!(report.witnesses.len(), 1);
        assert_eq!(report.witnesses[0].p, 127);
    }

    #[test]
    fn unsolvable_system_reported() {
        let sys = CongruenceSystem::new(vec![(1, 4), (3, 4)]);
        assert_eq!(sys.solution, None);
        assert!(matches!(
            find_witness_primes(&sys, 6, 1, 1000),
            Err(Error::UnsolvableSystem)
        ));
    }

    #[test]
    fn scan_frozen_minima() {
        let mut records = Vec::new();
        let min = liminf_scan(&ScanConfig::new(3, 2, 1000), |r| records.push(*r))
            .unwrap()
            .unwrap();
        assert_eq!((min.num, min.den), (974, 1942));
        assert_eq!(records.len(), 167);
        for pair in records.windows(2) {
            assert!(pair[1].running_min <= pair[0].running_min);
            assert!(pair[1].q > pair[0].q);
        }

        let min = liminf_scan(&ScanConfig::new(6, 2, 200), |_| {})
            .unwrap()
            .unwrap();
        assert_eq!((min.num, min.den), (8, 254));

        let min = liminf_scan(&ScanConfig::new(2, 2, 200), |_| {})
            .unwrap()
            .unwrap();
        assert_eq!((min.num, min.den), (64, 254));
    }

    #[test]
    fn scan_respects_resume_state() {
        let full = liminf_scan(&ScanConfig::new(6, 2, 400), |_| {}).unwrap().unwrap();
        let mut part1 = Vec::new();
        let first =
            liminf_scan(&ScanConfig::new(6, 2, 150), |r| part1.push(*r)).unwrap().unwrap();
        let mut cfg = ScanConfig::new(6, 2, 400);
        cfg.start = part1.last().unwrap().q + 1;
        cfg.initial_min = Some(first);
        let resumed = liminf_scan(&cfg, |_| {}).unwrap().unwrap();
        assert_eq!(resumed, full);
        assert_eq!((resumed.num, resumed.den), (full.num, full.den));
    }

    #[test]
    fn restricted_stream_only_sees_matching_primes() {
        let mut qs = Vec::new();
        liminf_scan(&ScanConfig::new(15, 30, 2000), |r| qs.push(r.q)).unwrap();
        assert!(!qs.is_empty());
        for q in &qs {
            assert_eq!(q % 30, 1);
        }
        // case 6: the +1 side is fully coprime to d for scanned primes
        let mut full_plus = true;
        liminf_scan(&ScanConfig::new(15, 30, 2000), |r| {
            full_plus &= r.r_plus == r.q + 1;
        })
        .unwrap();
        assert!(full_plus);
    }

    #[test]
    fn ratio_lower_bounds_by_case() {
        // odd prime power: one side stays whole, ratio >= (q-1)/(2q)
        liminf_scan(&ScanConfig::new(9, 2, 3000), |r| {
            assert!(r.r_minus == r.q - 1 || r.r_plus == r.q + 1, "q={}", r.q);
            assert!(r.r_minus + r.r_plus >= r.q - 1, "q={}", r.q);
        })
        .unwrap();

        // even prime power: the 2 mod 4 side keeps half, ratio >= (q-1)/(4q)
        liminf_scan(&ScanConfig::new(4, 2, 3000), |r| {
            assert!(2 * (r.r_minus + r.r_plus) >= r.q - 1, "q={}", r.q);
        })
        .unwrap();

        // case 7: v2(m_K) >= 2 pins the +1 side to exactly half
        liminf_scan(&ScanConfig::new(6, 12, 3000), |r| {
            assert_eq!(r.r_plus, (r.q + 1) / 2, "q={}", r.q);
        })
        .unwrap();
    }

    #[test]
    fn witness_ratio_upper_bound() {
        let sys = build_witness_system(6, 2, 2, 3).unwrap();
        let report = find_witness_primes(&sys, 6, 10, 5000).unwrap();
        assert!(report.complete);
        for w in &report.witnesses {
            let bound = (BigRational::new(BigInt::from(1), BigInt::from(9))
                + BigRational::new(BigInt::from(1), BigInt::from(8)))
                / big(2)
                + BigRational::new(BigInt::from(1), BigInt::from(w.p));
            assert!(
                ratio_rational(w.record.ratio) <= bound,
                "p={} ratio={}",
                w.p,
                w.record.ratio
            );
        }
    }

    #[test]
    fn running_min_stays_above_classified_floor() {
        for (d, m_k, limit) in [(3u64, 2u64, 2000u64), (2, 2, 2000), (6, 2, 2000)] {
            let class = perinf_chebyshev(d, m_k).unwrap();
            let mut first_q = None;
            let min = liminf_scan(&ScanConfig::new(d, m_k, limit), |r| {
                first_q.get_or_insert(r.q);
            })
            .unwrap()
            .unwrap();
            let floor = BigRational::new(
                BigInt::from(*class.value.numer()),
                BigInt::from(*class.value.denom()),
            ) - BigRational::new(BigInt::from(1), BigInt::from(2 * first_q.unwrap()));
            assert!(
                ratio_rational(min) >= floor,
                "d={d} m_K={m_k}: min {min} under floor"
            );
        }
    }

    #[test]
    fn scan_rejects_bad_parameters() {
        assert!(matches!(
            liminf_scan(&ScanConfig::new(1, 2, 100), |_| {}),
            Err(Error::DegreeTooSmall { .. })
        ));
        assert!(matches!(
            liminf_scan(&ScanConfig::new(3, 5, 100), |_| {}),
            Err(Error::InvalidCyclotomicOrder { .. })
        ));
    }

    #[test]
    fn unrestricted_scan_matches_rational_field_stream() {
        let mut restricted = Vec::new();
        liminf_scan(&ScanConfig::new(5, 2, 500), |r| restricted.push(*r)).unwrap();
        let mut cfg = ScanConfig::new(5, 6, 500);
        cfg.unrestricted = true;
        let mut unrestricted = Vec::new();
        liminf_scan(&cfg, |r| unrestricted.push(*r)).unwrap();
        assert_eq!(restricted, unrestricted);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let ck = Checkpoint {
            d: 6,
            m_k: 2,
            last_q: 127,
            min_num: 8,
            min_den: 254,
        };
        write_checkpoint(&path, &ck).unwrap();
        assert_eq!(read_checkpoint(&path).unwrap(), ck);

        std::fs::write(&path, "# something else\n1 2 3\n").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Parse { .. })));

        std::fs::write(&path, "# perred scan d=6 mk=2\n1 2\n").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Parse { .. })));

        assert!(matches!(
            read_checkpoint(&dir.path().join("missing.ckpt")),
            Err(Error::Parse { .. })
        ));
    }
}
