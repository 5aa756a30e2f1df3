use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Subcommand, ValueEnum};
use grkex_core::analysis::stream_rng;
use grkex_core::kex::{
    key_encode, key_from_hex, key_to_hex, public_key, sample_base, shared_secret, KexParams,
    KexSession,
};
use grkex_core::{BaseKind, Exponent, MatrixGR};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{emit, header, json_line, Format, RingArgs, SeedArgs, DEFAULT_RING};

#[derive(Subcommand)]
pub enum KexCommand {
    /// Sample (or reuse) a base matrix, a private exponent and its public key.
    Keygen(KeygenArgs),
    /// Public key for a given base and private exponent.
    Pubkey(PubkeyArgs),
    /// Shared matrix from a peer's public key and a private exponent.
    Shared(SharedArgs),
    /// Both sides of an exchange in one process.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum BaseChoice {
    #[default]
    Random,
    Structured,
}

impl From<BaseChoice> for BaseKind {
    fn from(c: BaseChoice) -> Self {
        match c {
            BaseChoice::Random => BaseKind::Random,
            BaseChoice::Structured => BaseKind::Structured,
        }
    }
}

#[derive(Args, Debug)]
pub struct ExchangeArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Smallest private exponent, e.g. `1e22`.
    #[arg(long, default_value = "1e22")]
    exp_lo: Exponent,
    /// Largest private exponent.
    #[arg(long, default_value = "1e28")]
    exp_hi: Exponent,
    #[arg(long, value_enum, default_value_t)]
    base_kind: BaseChoice,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExchangeArgs {
    fn params(&self) -> KexParams {
        let r = self.ring.resolve(DEFAULT_RING);
        KexParams::new(r.n, r.m, r.k).with_range(self.exp_lo.clone(), self.exp_hi.clone())
    }
}

#[derive(Args, Debug)]
pub struct KeygenArgs {
    #[command(flatten)]
    common: ExchangeArgs,
    /// Existing base key (hex, or a file holding it); sampled when absent.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Args, Debug)]
pub struct PubkeyArgs {
    /// Base key as hex, or a file holding it.
    #[arg(long)]
    base: String,
    /// Private exponent in decimal.
    #[arg(long)]
    private: Exponent,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SharedArgs {
    /// Peer public key as hex, or a file holding it.
    #[arg(long)]
    peer: String,
    #[arg(long)]
    private: Exponent,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[command(flatten)]
    common: ExchangeArgs,
}

pub fn run(cmd: KexCommand) -> anyhow::Result<()> {
    match cmd {
        KexCommand::Keygen(a) => keygen(a),
        KexCommand::Pubkey(a) => pubkey(a),
        KexCommand::Shared(a) => shared(a),
        KexCommand::Demo(a) => demo(a),
    }
}

/// A key argument is either hex or the path of a file holding hex.
fn read_key_text(arg: &str) -> anyhow::Result<String> {
    if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_owned())
    }
}

fn read_key(arg: &str) -> anyhow::Result<MatrixGR> {
    Ok(key_from_hex(&read_key_text(arg)?)?.0)
}

fn digest(x: &MatrixGR) -> String {
    hex::encode(Sha256::digest(key_encode(x)))
}

/// Ordered `field,value` records, or one JSON object.
struct Record(Vec<(&'static str, String)>);

impl Record {
    fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Csv => {
                let mut s = String::from("field,value\n");
                for (k, v) in &self.0 {
                    s += &format!("{k},{v}\n");
                }
                s
            }
            Format::Json => {
                let map: serde_json::Map<_, _> = self
                    .0
                    .iter()
                    .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                    .collect();
                json_line(&map)?
            }
        })
    }
}

fn keygen(a: KeygenArgs) -> anyhow::Result<()> {
    let c = &a.common;
    let params = c.params();
    let seed = c.seed.resolve();
    header("kex keygen", seed, Some(c.ring.resolve(DEFAULT_RING)), "");
    let base = match &a.base {
        Some(b) => read_key(b)?,
        None => sample_base(&params, c.base_kind.into(), &mut stream_rng(seed, 0))?,
    };
    let session = KexSession::new(params, base, &mut stream_rng(seed, 1))?;
    let record = Record(vec![
        ("base", key_to_hex(session.base())),
        ("private", session.exponent().to_string()),
        ("public", key_to_hex(session.public())),
    ]);
    emit(c.out.as_ref(), &record.render(c.format)?)
}

fn pubkey(a: PubkeyArgs) -> anyhow::Result<()> {
    let base = read_key(&a.base)?;
    let public = public_key(&base, &a.private)?;
    let record = Record(vec![("public", key_to_hex(&public))]);
    emit(a.out.as_ref(), &record.render(a.format)?)
}

fn shared(a: SharedArgs) -> anyhow::Result<()> {
    let (peer, params) = key_from_hex(&read_key_text(&a.peer)?)?;
    let secret = shared_secret(&params, &peer, &a.private)?;
    let record = Record(vec![
        ("shared", key_to_hex(&secret)),
        ("sha256", digest(&secret)),
    ]);
    emit(a.out.as_ref(), &record.render(a.format)?)
}

#[derive(Serialize)]
struct DemoRecord {
    seed: u64,
    base: String,
    alice_public: String,
    bob_public: String,
    alice_sha256: String,
    bob_sha256: String,
    agree: bool,
}

fn demo(a: DemoArgs) -> anyhow::Result<()> {
    let c = &a.common;
    let params = c.params();
    let seed = c.seed.resolve();
    header("kex demo", seed, Some(c.ring.resolve(DEFAULT_RING)), "");
    let base = sample_base(&params, c.base_kind.into(), &mut stream_rng(seed, 0))?;
    let mut alice = KexSession::new(params.clone(), base.clone(), &mut stream_rng(seed, 1))?;
    let mut bob = KexSession::new(params, base.clone(), &mut stream_rng(seed, 2))?;
    let (alice_public, bob_public) = (alice.public().clone(), bob.public().clone());
    let alice_sha256 = digest(alice.complete(&bob_public)?);
    let bob_sha256 = digest(bob.complete(&alice_public)?);
    let agree = alice.shared() == bob.shared();
    let text = match c.format {
        Format::Json => json_line(&DemoRecord {
            seed,
            base: key_to_hex(&base),
            alice_public: key_to_hex(&alice_public),
            bob_public: key_to_hex(&bob_public),
            alice_sha256,
            bob_sha256,
            agree,
        })?,
        Format::Csv => Record(vec![
            ("base", key_to_hex(&base)),
            ("alice_public", key_to_hex(&alice_public)),
            ("bob_public", key_to_hex(&bob_public)),
            ("alice_sha256", alice_sha256),
            ("bob_sha256", bob_sha256),
        ])
        .render(Format::Csv)?,
    };
    emit(c.out.as_ref(), &text)?;
    if !agree {
        bail!("shared secrets differ");
    }
    Ok(())
}
