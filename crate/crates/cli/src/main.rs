mod challenge;
mod ddh;
mod kex;
mod misc;
mod search;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "grkex",
    version,
    about = "Key exchange over matrices of group ring elements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key generation and exchange.
    #[command(subcommand)]
    Kex(kex::KexCommand),
    /// Timing.
    #[command(subcommand)]
    Bench(misc::BenchCommand),
    /// Distribution experiments on powers of random matrices.
    #[command(subcommand)]
    Ddh(ddh::DdhCommand),
    /// Exact and sampled probability that a uniform element has support in a range.
    SupportProb(misc::SupportArgs),
    /// Orbit searches.
    #[command(subcommand)]
    Orbit(search::OrbitCommand),
    /// Multiplicative order of a sampled invertible matrix.
    Order(search::OrderArgs),
    /// Baby-step giant-step on a planted toy instance.
    Bsgs(search::BsgsArgs),
    /// The published challenge matrices.
    #[command(subcommand)]
    Challenge(challenge::ChallengeCommand),
}

/// Ring and matrix size; unset values take the command's defaults.
#[derive(Args, Clone, Debug)]
pub struct RingArgs {
    /// Coefficient modulus.
    #[arg(long)]
    pub n: Option<u32>,
    /// Symmetric group degree.
    #[arg(long)]
    pub m: Option<usize>,
    /// Matrix dimension.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ring {
    pub n: u32,
    pub m: usize,
    pub k: usize,
}

impl RingArgs {
    pub fn resolve(&self, default: Ring) -> Ring {
        Ring {
            n: self.n.unwrap_or(default.n),
            m: self.m.unwrap_or(default.m),
            k: self.k.unwrap_or(default.k),
        }
    }
}

pub const DEFAULT_RING: Ring = Ring { n: 7, m: 5, k: 3 };

#[derive(Args, Clone, Debug)]
pub struct SeedArgs {
    /// Seed for every random choice; drawn from the OS when absent.
    #[arg(long, env = "GRKEX_SEED")]
    pub seed: Option<u64>,
}

impl SeedArgs {
    pub fn resolve(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Prints the line that makes a run reproducible.
pub fn header(command: &str, seed: u64, ring: Option<Ring>, extra: &str) {
    let mut line = format!("# grkex {command} seed={seed}");
    if let Some(r) = ring {
        line += &format!(" n={} m={} k={}", r.n, r.m, r.k);
    }
    if !extra.is_empty() {
        line += " ";
        line += extra;
    }
    eprintln!("{line}");
}

/// Writes `text` to `out` if given, otherwise to stdout.
pub fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn json_line<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kex(c) => kex::run(c),
        Command::Bench(c) => misc::bench(c),
        Command::Ddh(c) => ddh::run(c),
        Command::SupportProb(a) => misc::support_prob(a),
        Command::Orbit(c) => search::orbit(c),
        Command::Order(a) => search::order(a),
        Command::Bsgs(a) => search::bsgs(a),
        Command::Challenge(c) => challenge::run(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
