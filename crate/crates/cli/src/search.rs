use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Subcommand, ValueEnum};
use grkex_core::analysis::stream_rng;
use grkex_core::orbit::{bsgs_solve, orbit_detect, order_of_invertible, DEFAULT_BSGS_ENTRIES};
use grkex_core::structured::{random_invertible, scalar_s, INVERTIBLE_FACTORS};
use grkex_core::{Exponent, MatrixGR, RingContext};
use rand::Rng;
use serde::Serialize;

use crate::{emit, header, json_line, Format, Ring, RingArgs, SeedArgs, DEFAULT_RING};

const TOY_RING: Ring = Ring { n: 2, m: 3, k: 2 };

#[derive(Subcommand)]
pub enum OrbitCommand {
    /// Floyd cycle detection on the powers of sampled matrices.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum MatrixChoice {
    #[default]
    Random,
    Invertible,
    /// An invertible matrix times the scalar zero divisor; only over `Z_7[S_5]`.
    Structured,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Most matrix products spent per matrix.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Matrices to examine.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t)]
    matrix: MatrixChoice,
}

#[derive(Args, Debug)]
pub struct OrderArgs {
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct BsgsArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Largest planted exponent, which is also the search bound.
    #[arg(long, default_value = "1000")]
    exp_hi: Exponent,
    /// Cap on stored baby steps.
    #[arg(long, default_value_t = DEFAULT_BSGS_ENTRIES)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sample(
    ctx: &std::sync::Arc<RingContext>,
    k: usize,
    choice: MatrixChoice,
    rng: &mut impl Rng,
) -> anyhow::Result<MatrixGR> {
    Ok(match choice {
        MatrixChoice::Random => MatrixGR::random(ctx, k, rng),
        MatrixChoice::Invertible => random_invertible(ctx, k, INVERTIBLE_FACTORS, rng)?.0,
        MatrixChoice::Structured => {
            let s = scalar_s(ctx, k)?;
            &random_invertible(ctx, k, INVERTIBLE_FACTORS, rng)?.0 * &s
        }
    })
}

/// One record per line, or a CSV table with the given columns.
fn render<T: Serialize>(records: &[T], format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => records.iter().map(json_line).collect(),
        Format::Csv => {
            let mut out = String::new();
            for (i, r) in records.iter().enumerate() {
                let serde_json::Value::Object(map) = serde_json::to_value(r)? else {
                    anyhow::bail!("record is not an object");
                };
                if i == 0 {
                    out += &map.keys().cloned().collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
                let cells: Vec<String> = map
                    .values()
                    .map(|v| match v {
                        serde_json::Value::Null => String::new(),
                        v => v.to_string(),
                    })
                    .collect();
                out += &cells.join(",");
                out.push('\n');
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct ScanRecord {
    trial: u64,
    found: bool,
    tail: Option<u64>,
    period: Option<u64>,
    multiplications_used: u64,
    wall_ms: f64,
}

pub fn orbit(cmd: OrbitCommand) -> anyhow::Result<()> {
    let OrbitCommand::Scan(a) = cmd;
    let s = &a.search;
    let ring = s.ring.resolve(DEFAULT_RING);
    let seed = s.seed.resolve();
    header(
        "orbit scan",
        seed,
        Some(ring),
        &format!("budget={} trials={}", s.budget, s.trials),
    );
    let ctx = RingContext::new(ring.n, ring.m)?;
    let mut records = Vec::new();
    for trial in 0..s.trials {
        let x = sample(&ctx, ring.k, a.matrix, &mut stream_rng(seed, trial))?;
        let start = Instant::now();
        let r = orbit_detect(&x, s.budget);
        records.push(ScanRecord {
            trial,
            found: r.orbit.is_some(),
            tail: r.orbit.map(|o| o.tail),
            period: r.orbit.map(|o| o.period),
            multiplications_used: r.multiplications,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    emit(s.out.as_ref(), &render(&records, s.format)?)
}

#[derive(Serialize)]
struct OrderRecord {
    trial: u64,
    found: bool,
    order: Option<u64>,
    multiplications_used: u64,
    wall_ms: f64,
}

pub fn order(a: OrderArgs) -> anyhow::Result<()> {
    let s = &a.search;
    let ring = s.ring.resolve(DEFAULT_RING);
    let seed = s.seed.resolve();
    header(
        "order",
        seed,
        Some(ring),
        &format!("budget={} trials={}", s.budget, s.trials),
    );
    let ctx = RingContext::new(ring.n, ring.m)?;
    let mut records = Vec::new();
    for trial in 0..s.trials {
        let x = sample(
            &ctx,
            ring.k,
            MatrixChoice::Invertible,
            &mut stream_rng(seed, trial),
        )?;
        let start = Instant::now();
        let order = order_of_invertible(&x, s.budget);
        records.push(OrderRecord {
            trial,
            found: order.is_some(),
            order,
            // Reaching A^t costs t - 1 products.
            multiplications_used: order.unwrap_or(s.budget).saturating_sub(1),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    emit(s.out.as_ref(), &render(&records, s.format)?)
}

#[derive(Serialize)]
struct BsgsRecord {
    trial: u64,
    planted: u64,
    exponent: Option<u64>,
    found: bool,
    entries_stored: u64,
    multiplications_used: u64,
    wall_ms: f64,
}

pub fn bsgs(a: BsgsArgs) -> anyhow::Result<()> {
    let ring = a.ring.resolve(TOY_RING);
    let seed = a.seed.resolve();
    let bound = a
        .exp_hi
        .to_u64()
        .ok_or_else(|| anyhow::anyhow!("--exp-hi {} does not fit in 64 bits", a.exp_hi))?;
    header(
        "bsgs",
        seed,
        Some(ring),
        &format!("exp_hi={bound} budget={} trials={}", a.budget, a.trials),
    );
    let ctx = RingContext::new(ring.n, ring.m)?;
    let mut records = Vec::new();
    for trial in 0..a.trials {
        let mut rng = stream_rng(seed, trial);
        let m = MatrixGR::random(&ctx, ring.k, &mut rng);
        let planted = rng.gen_range(0..=bound);
        let target = m.pow_u64(planted);
        let start = Instant::now();
        let out = bsgs_solve(&m, &target, bound, a.budget)?;
        records.push(BsgsRecord {
            trial,
            planted,
            exponent: out.exponent,
            found: out.exponent.is_some(),
            entries_stored: out.entries_stored,
            multiplications_used: out.multiplications,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    emit(a.out.as_ref(), &render(&records, a.format)?)
}
