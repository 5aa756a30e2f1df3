use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Subcommand};
use grkex_core::analysis::{fmt17, stream_rng, support_fraction, support_histogram};
use grkex_core::stats::{binom_support_prob, binom_support_ratio};
use grkex_core::{Exponent, MatrixGR, RingContext};
use serde::Serialize;

use crate::{emit, header, json_line, Format, Ring, RingArgs, SeedArgs, DEFAULT_RING};

#[derive(Subcommand)]
pub enum BenchCommand {
    /// Mean wall time of one matrix power with a random exponent.
    Pow(PowArgs),
}

#[derive(Args, Debug)]
pub struct PowArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Decimal digits of each exponent.
    #[arg(long, default_value_t = 100)]
    exp_digits: u32,
    #[arg(long, default_value_t = 250)]
    reps: u32,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PowReport {
    seed: u64,
    n: u32,
    m: usize,
    k: usize,
    exp_digits: u32,
    reps: u32,
    mean_ms: f64,
    sd_ms: f64,
    min_ms: f64,
    max_ms: f64,
}

pub fn bench(cmd: BenchCommand) -> anyhow::Result<()> {
    let BenchCommand::Pow(a) = cmd;
    anyhow::ensure!(a.exp_digits > 0, "--exp-digits must be positive");
    anyhow::ensure!(a.reps > 0, "--reps must be positive");
    let ring = a.ring.resolve(DEFAULT_RING);
    let seed = a.seed.resolve();
    header(
        "bench pow",
        seed,
        Some(ring),
        &format!("exp_digits={} reps={}", a.exp_digits, a.reps),
    );
    let ctx = RingContext::new(ring.n, ring.m)?;
    let lo = Exponent::pow10(a.exp_digits - 1);
    let hi = Exponent::from(Exponent::pow10(a.exp_digits).as_biguint() - 1u32);
    let mut times = Vec::with_capacity(a.reps as usize);
    for rep in 0..a.reps {
        let mut rng = stream_rng(seed, rep as u64);
        let base = MatrixGR::random(&ctx, ring.k, &mut rng);
        let e = Exponent::sample_range(&lo, &hi, &mut rng)?;
        let start = Instant::now();
        std::hint::black_box(base.pow(&e));
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let var =
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (times.len().max(2) - 1) as f64;
    let report = PowReport {
        seed,
        n: ring.n,
        m: ring.m,
        k: ring.k,
        exp_digits: a.exp_digits,
        reps: a.reps,
        mean_ms: mean,
        sd_ms: var.sqrt(),
        min_ms: times.iter().copied().fold(f64::INFINITY, f64::min),
        max_ms: times.iter().copied().fold(0.0, f64::max),
    };
    let text = match a.format {
        Format::Json => json_line(&report)?,
        Format::Csv => format!(
            "n,m,k,exp_digits,reps,mean_ms,sd_ms,min_ms,max_ms\n{},{},{},{},{},{},{},{},{}\n",
            report.n,
            report.m,
            report.k,
            report.exp_digits,
            report.reps,
            fmt17(report.mean_ms),
            fmt17(report.sd_ms),
            fmt17(report.min_ms),
            fmt17(report.max_ms)
        ),
    };
    emit(a.out.as_ref(), &text)
}

#[derive(Args, Debug)]
pub struct SupportArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Smallest support size counted.
    #[arg(long, default_value_t = 50)]
    lo: usize,
    /// Largest support size counted.
    #[arg(long, default_value_t = 70)]
    hi: usize,
    /// Monte Carlo samples; 0 skips sampling.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SupportReport {
    n: u32,
    m: usize,
    lo: usize,
    hi: usize,
    exact_numerator: String,
    exact_denominator: String,
    exact: f64,
    trials: u64,
    sampled: Option<f64>,
}

pub fn support_prob(a: SupportArgs) -> anyhow::Result<()> {
    let ring = a.ring.resolve(Ring { n: 2, m: 5, k: 1 });
    let seed = a.seed.resolve();
    header(
        "support-prob",
        seed,
        None,
        &format!("n={} m={} lo={} hi={}", ring.n, ring.m, a.lo, a.hi),
    );
    let ctx = RingContext::new(ring.n, ring.m)?;
    let (num, den) = binom_support_ratio(ring.m, ring.n, a.lo, a.hi)?;
    let exact = binom_support_prob(ring.m, ring.n, a.lo, a.hi)?;
    let sampled = (a.trials > 0)
        .then(|| support_fraction(&support_histogram(&ctx, a.trials, seed), a.lo, a.hi));
    let report = SupportReport {
        n: ring.n,
        m: ring.m,
        lo: a.lo,
        hi: a.hi,
        exact_numerator: num.to_string(),
        exact_denominator: den.to_string(),
        exact,
        trials: a.trials,
        sampled,
    };
    let text = match a.format {
        Format::Json => json_line(&report)?,
        Format::Csv => format!(
            "n,m,lo,hi,exact,sampled,trials\n{},{},{},{},{},{},{}\n",
            report.n,
            report.m,
            report.lo,
            report.hi,
            fmt17(report.exact),
            report.sampled.map(fmt17).unwrap_or_default(),
            report.trials
        ),
    };
    emit(a.out.as_ref(), &text)
}
