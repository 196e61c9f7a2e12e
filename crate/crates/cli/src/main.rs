//! Command-line front end for the perred toolkit: exact periodic-point
//! counts over prime fields, liminf classification, resumable ratio scans,
//! witness-prime construction, conjugacy detection, and random-map
//! baselines.
//!
//! Exact values (counts, ratios) are printed as integers or `num/den`
//! fractions; floating-point renderings only ever appear alongside them.
//! The exit code is zero iff every internal cross-check passed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use perred_core::chebyshev::{
    closed_form_count, periodic_bruteforce, periodic_set_by_orders, ClosedFormVariant, ExactRatio,
    Sign,
};
use perred_core::classify::{perinf_chebyshev, perinf_polynomial};
use perred_core::conjugacy::{detect_chebyshev_conjugacy, parse_poly, ConjugacyOutcome};
use perred_core::dynamics::BruteForceBudget;
use perred_core::finitefield::PrimeFieldCtx;
use perred_core::randmap::sample_and_measure;
use perred_core::witness::{
    build_witness_system, find_witness_primes, liminf_scan, read_checkpoint, write_checkpoint,
    Checkpoint, ScanConfig,
};

#[derive(Parser)]
#[command(
    name = "perred",
    version,
    about = "Exact counting and liminf classification of periodic points of Chebyshev maps over prime fields"
)]
struct Cli {
    /// Worker threads for parallel steps (default: one per core)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count periodic points of sign * T_d on F_p
    Count(CountArgs),
    /// Classify the liminf proportion for (d, m_K) or for a polynomial
    Classify(ClassifyArgs),
    /// Scan primes q = 1 (mod m_K), tracking the ratio's running minimum
    Scan(ScanArgs),
    /// Find witness primes forcing small ratios via congruence conditions
    Witness(WitnessArgs),
    /// Detect whether a polynomial is linearly conjugate to sign * T_d
    Conjugacy(ConjugacyArgs),
    /// Periodic-point statistics of uniformly random maps on [0, n)
    Randmap(RandmapArgs),
}

#[derive(Args)]
struct CountArgs {
    /// Odd prime modulus
    #[arg(long)]
    p: u64,
    /// Chebyshev degree, at least 2
    #[arg(long)]
    d: u64,
    /// +1 or -1
    #[arg(long, default_value = "+1", allow_hyphen_values = true)]
    sign: String,
    #[arg(long, value_enum, default_value_t = Method::All)]
    method: Method,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Exhaustive orbit walk over F_p
    Brute,
    /// Multiplicative-order characterization in F_{p^2}
    Orders,
    /// Closed form from coprime parts of p - 1 and p + 1
    Formula,
    /// All three, cross-checked; disagreement is a hard error
    All,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["d", "poly"]))]
struct ClassifyArgs {
    /// Chebyshev degree (used together with --mk)
    #[arg(long, requires = "mk", conflicts_with = "poly")]
    d: Option<u64>,
    /// Even order of the roots of unity in the base field
    #[arg(long, requires = "d", conflicts_with = "poly")]
    mk: Option<u64>,
    /// Rational polynomial, e.g. "2*x^3 - 3*x"
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct ScanArgs {
    /// Chebyshev degree
    #[arg(long)]
    d: u64,
    /// Even order restricting the prime progression to q = 1 (mod m_K)
    #[arg(long)]
    mk: u64,
    /// Scan primes up to this bound
    #[arg(long)]
    limit: u64,
    /// Write CSV here (with a checkpoint alongside) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue a previous --out scan from its checkpoint
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct WitnessArgs {
    /// Chebyshev degree
    #[arg(long)]
    d: u64,
    /// Even order the congruence construction targets
    #[arg(long)]
    mk: u64,
    /// Exponent of the odd prime-power modulus
    #[arg(long, default_value_t = 4)]
    m1: u32,
    /// Exponent of the modulus at 2
    #[arg(long, default_value_t = 4)]
    m2: u32,
    /// How many witness primes to collect
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// Search primes up to this bound
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
}

#[derive(Args)]
struct ConjugacyArgs {
    /// Rational polynomial to test, e.g. "x^2 - 2"
    #[arg(long)]
    poly: String,
}

#[derive(Args)]
struct RandmapArgs {
    /// Domain size
    #[arg(long)]
    n: u64,
    /// Number of independent maps to sample
    #[arg(long, default_value_t = 100)]
    samples: u64,
    /// Base seed; sample i draws from the stream for (seed, i)
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().context("cannot build worker pool")?;
    let budget = memory_budget()?;
    pool.install(|| match cli.command {
        Command::Count(a) => run_count(a, &budget),
        Command::Classify(a) => run_classify(a),
        Command::Scan(a) => run_scan(a),
        Command::Witness(a) => run_witness(a),
        Command::Conjugacy(a) => run_conjugacy(a),
        Command::Randmap(a) => run_randmap(a, &budget),
    })
}

/// Brute-force domain cap from PERRED_MEMORY_MB (default 1024).
fn memory_budget() -> Result<BruteForceBudget> {
    let mb = match std::env::var("PERRED_MEMORY_MB") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .with_context(|| format!("PERRED_MEMORY_MB must be an integer, got {s:?}"))?,
        Err(_) => 1024,
    };
    Ok(BruteForceBudget::from_memory_mb(mb))
}

fn parse_sign(text: &str) -> Result<Sign> {
    match text {
        "+1" | "1" => Ok(Sign::Plus),
        "-1" => Ok(Sign::Minus),
        other => bail!("sign must be +1 or -1, got {other:?}"),
    }
}

fn run_count(args: CountArgs, budget: &BruteForceBudget) -> Result<()> {
    let sign = parse_sign(&args.sign)?;
    let ctx = PrimeFieldCtx::new(args.p)?;
    let compute = |m: Method| -> Result<u64> {
        Ok(match m {
            Method::Brute => periodic_bruteforce(&ctx, args.d, sign, budget)?.0.count(),
            Method::Orders => periodic_set_by_orders(&ctx, args.d).len() as u64,
            Method::Formula => closed_form_count(args.p, args.d, ClosedFormVariant::Calibrated)?,
            Method::All => unreachable!("dispatched below"),
        })
    };
    if args.method == Method::All {
        let brute = compute(Method::Brute)?;
        let orders = compute(Method::Orders)?;
        let formula = compute(Method::Formula)?;
        let agree = brute == orders && orders == formula;
        println!(
            "brute={brute} orders={orders} formula={formula} {}",
            if agree { "agree" } else { "DISAGREE" }
        );
        if !agree {
            bail!("counting methods disagree at p={}, d={}", args.p, args.d);
        }
    } else {
        println!("{}", compute(args.method)?);
    }
    Ok(())
}

fn run_classify(args: ClassifyArgs) -> Result<()> {
    let (outcome, detection) = if let Some(text) = &args.poly {
        let f = parse_poly(text)?;
        (perinf_polynomial(&f), detect_chebyshev_conjugacy(&f).ok())
    } else {
        // clap guarantees both are present when --poly is absent
        (perinf_chebyshev(args.d.unwrap(), args.mk.unwrap())?, None)
    };
    let mut obj = serde_json::Map::new();
    obj.insert("case_id".into(), outcome.case_id.into());
    if let Some(via) = outcome.via_case {
        obj.insert("via_case".into(), via.into());
    }
    obj.insert("value".into(), outcome.value.to_string().into());
    obj.insert("d".into(), outcome.d.into());
    obj.insert("m_K".into(), outcome.m_k.into());
    if args.poly.is_some() {
        obj.insert(
            "detection".into(),
            detection.map_or(serde_json::Value::Null, conjugacy_json),
        );
    }
    println!("{}", serde_json::Value::Object(obj));
    Ok(())
}

fn conjugacy_json(out: ConjugacyOutcome) -> serde_json::Value {
    match out {
        ConjugacyOutcome::NotConjugate => serde_json::json!({ "variant": "not_conjugate" }),
        ConjugacyOutcome::Conjugate {
            d,
            sign,
            shift_b,
            a_squared,
            a_rational,
        } => serde_json::json!({
            "variant": "conjugate",
            "d": d,
            "sign": match sign { Sign::Plus => "+1", Sign::Minus => "-1" },
            "shift_b": shift_b.to_string(),
            "a_squared": a_squared.to_string(),
            "a_rational": a_rational.map(|a| a.to_string()),
        }),
    }
}

fn run_conjugacy(args: ConjugacyArgs) -> Result<()> {
    let f = parse_poly(&args.poly)?;
    let out = detect_chebyshev_conjugacy(&f)?;
    println!("{}", conjugacy_json(out));
    Ok(())
}

/// The checkpoint sits next to the CSV as `<name>.ckpt`.
fn checkpoint_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".ckpt");
    out.with_file_name(name)
}

/// Rows already in a scan CSV, with trailing summary comments dropped so a
/// resumed scan can append and reproduce the uninterrupted output.
fn data_rows(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        if !line.starts_with('#') {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn run_scan(args: ScanArgs) -> Result<()> {
    let mut cfg = ScanConfig::new(args.d, args.mk, args.limit);
    let ckpt_path = args.out.as_deref().map(checkpoint_path);
    let mut existing = String::new();
    if args.resume {
        let Some(out) = &args.out else {
            bail!("--resume needs --out: the checkpoint lives next to the output file");
        };
        let ck = read_checkpoint(ckpt_path.as_ref().unwrap())
            .with_context(|| format!("cannot resume {}", out.display()))?;
        if ck.d != args.d || ck.m_k != args.mk {
            bail!(
                "checkpoint is for d={} mk={}, not d={} mk={}",
                ck.d,
                ck.m_k,
                args.d,
                args.mk
            );
        }
        cfg.start = ck.last_q + 1;
        cfg.initial_min = Some(ExactRatio::new(ck.min_num, ck.min_den));
        existing = data_rows(
            &fs::read_to_string(out)
                .with_context(|| format!("cannot read previous output {}", out.display()))?,
        );
    }

    let mut body = String::new();
    if existing.is_empty() {
        body.push_str("q,r_minus,r_plus,ratio,running_min\n");
    }
    let mut last_q = 0;
    let min = liminf_scan(&cfg, |r| {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            r.q, r.r_minus, r.r_plus, r.ratio, r.running_min
        ));
        last_q = r.q;
    })?;

    let target = perinf_chebyshev(args.d, args.mk)?;
    let summary = match min {
        Some(m) => format!(
            "# running_min = {} ({:.6}) classified_target = {} (case {})\n",
            m,
            m.as_f64(),
            target.value,
            target.case_id
        ),
        None => format!(
            "# no primes scanned; classified_target = {} (case {})\n",
            target.value, target.case_id
        ),
    };

    match &args.out {
        Some(out) => {
            fs::write(out, existing + &body + &summary)
                .with_context(|| format!("cannot write {}", out.display()))?;
            if let Some(m) = min {
                if last_q == 0 {
                    // resumed past the limit: nothing new, keep the old mark
                    last_q = cfg.start - 1;
                }
                write_checkpoint(
                    ckpt_path.as_ref().unwrap(),
                    &Checkpoint {
                        d: args.d,
                        m_k: args.mk,
                        last_q,
                        min_num: m.num,
                        min_den: m.den,
                    },
                )?;
            }
            eprintln!("wrote {}", out.display());
        }
        None => {
            // tolerate a reader that stops early (scan | head)
            let mut stdout = io::stdout().lock();
            stdout
                .write_all((existing + &body + &summary).as_bytes())
                .and_then(|()| stdout.flush())
                .or_else(|e| match e.kind() {
                    io::ErrorKind::BrokenPipe => Ok(()),
                    _ => Err(e),
                })?;
        }
    }
    Ok(())
}

fn run_witness(args: WitnessArgs) -> Result<()> {
    let sys = build_witness_system(args.d, args.mk, args.m1, args.m2)?;
    let parts: Vec<String> = sys
        .congruences
        .iter()
        .map(|&(a, n)| format!("x = {a} (mod {n})"))
        .collect();
    let (x, m) = sys
        .solution
        .with_context(|| format!("no combined solution for [{}]", parts.join(", ")))?;
    println!("system: x = {x} (mod {m})  [{}]", parts.join(", "));

    let report = find_witness_primes(&sys, args.d, args.count, args.limit)?;
    let mut all_ok = true;
    for w in &report.witnesses {
        let r = &w.record;
        println!(
            "q={} r_minus={} r_plus={} ratio={} ({:.6}) recheck={}",
            w.p,
            r.r_minus,
            r.r_plus,
            r.ratio,
            r.ratio.as_f64(),
            if w.recheck_passed { "ok" } else { "FAILED" }
        );
        all_ok &= w.recheck_passed;
    }
    if !report.complete {
        println!(
            "# found {} of {} below {}",
            report.witnesses.len(),
            args.count,
            args.limit
        );
    }
    if !all_ok {
        bail!("a witness prime failed the divisibility recheck");
    }
    Ok(())
}

fn run_randmap(args: RandmapArgs, budget: &BruteForceBudget) -> Result<()> {
    let s = sample_and_measure(args.n, args.samples, args.seed, budget)?;
    println!(
        "n={} samples={} seed={} sum={} mean={:.6} std_dev={:.6} reference={:.6}",
        s.n, s.samples, s.seed, s.sum, s.mean, s.std_dev, s.reference
    );
    Ok(())
}
