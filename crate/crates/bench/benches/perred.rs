//! Benchmarks for the counting pipeline: coprime parts, factorization,
//! the three periodic-point counters, prime streaming, and a full scan.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use perred_bench::{medium_ctx, P_MEDIUM};
use perred_core::chebyshev::{
    cheb_eval, closed_form_count, periodic_bruteforce, periodic_set_by_orders, ClosedFormVariant,
    Sign,
};
use perred_core::dynamics::BruteForceBudget;
use perred_core::numtheory::{coprime_part, factorize, primes_in_progression};
use perred_core::witness::{liminf_scan, ScanConfig};

fn bench_coprime_part(c: &mut Criterion) {
    c.bench_function("coprime_part/1000 values near 10^6", |b| {
        b.iter(|| {
            let mut acc = 0u64;
            for n in 1_000_000..1_001_000u64 {
                acc ^= coprime_part(black_box(n), black_box(6));
            }
            acc
        })
    });
}

fn bench_factorize(c: &mut Criterion) {
    // a prime, so trial division runs to the square root: the worst case
    c.bench_function("factorize/prime near 10^12", |b| {
        b.iter(|| factorize(black_box(999_999_999_989)))
    });
}

fn bench_counters(c: &mut Criterion) {
    let ctx = medium_ctx();
    let budget = BruteForceBudget::from_memory_mb(256);
    c.bench_function("count/bruteforce p=99991 d=6", |b| {
        b.iter(|| {
            periodic_bruteforce(black_box(&ctx), 6, Sign::Plus, &budget)
                .unwrap()
                .0
                .count()
        })
    });
    c.bench_function("count/by_orders p=99991 d=6", |b| {
        b.iter(|| periodic_set_by_orders(black_box(&ctx), 6).len())
    });
    c.bench_function("count/closed_form p=99991 d=6", |b| {
        b.iter(|| closed_form_count(black_box(P_MEDIUM), 6, ClosedFormVariant::Calibrated).unwrap())
    });
}

fn bench_cheb_eval(c: &mut Criterion) {
    let ctx = medium_ctx();
    c.bench_function("cheb_eval/d=1023 over 1000 points", |b| {
        b.iter(|| {
            let mut acc = 0u64;
            for x in 1..=1000u64 {
                acc ^= cheb_eval(black_box(&ctx), 1023, x);
            }
            acc
        })
    });
}

fn bench_prime_stream(c: &mut Criterion) {
    // sparse progression: exercises the candidate-stepped primality path
    c.bench_function("primes/1 mod 20736 up to 10^7", |b| {
        b.iter(|| primes_in_progression(3, 1, black_box(20736), 10_000_000).count())
    });
    // dense progression: exercises the segmented sieve path
    c.bench_function("primes/1 mod 2 up to 10^6", |b| {
        b.iter(|| primes_in_progression(3, 1, black_box(2), 1_000_000).count())
    });
}

fn bench_scan(c: &mut Criterion) {
    c.bench_function("scan/d=3 mk=2 up to 10^5", |b| {
        b.iter(|| {
            let cfg = ScanConfig::new(3, 2, 100_000);
            let mut rows = 0u64;
            let min = liminf_scan(&cfg, |_| rows += 1).unwrap();
            (rows, min)
        })
    });
}

criterion_group!(
    benches,
    bench_coprime_part,
    bench_factorize,
    bench_counters,
    bench_cheb_eval,
    bench_prime_stream,
    bench_scan
);
criterion_main!(benches);
