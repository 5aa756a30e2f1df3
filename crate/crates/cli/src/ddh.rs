use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand, ValueEnum};
use grkex_core::analysis::{
    exp_ddh_product, exp_triples, exp_uniformity, fmt17, qq_pairs, BaseMode, ExperimentConfig,
    ExperimentRanges, ExponentRange, PairedTables, Reference, DEFAULT_QQ_THRESHOLD,
};
use grkex_core::stats::{ChiSquare, DEFAULT_ALPHA};
use grkex_core::Exponent;
use serde::Serialize;

use crate::{emit, header, json_line, Format, Ring, RingArgs, SeedArgs};

const DDH_RING: Ring = Ring { n: 7, m: 5, k: 2 };

#[derive(Subcommand)]
pub enum DdhCommand {
    /// `M^{ab}` against `M^c` with `c` about as large as `ab`.
    Exp1(PairedArgs),
    /// `M^a` against a uniform matrix.
    Exp2(UniformityArgs),
    /// Residue triples of `(M^a, M^b, M^{ab})` for a fixed `M`.
    Exp3(TripleArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Trials per run; 500 for exp1 and exp2, 30000 for exp3 when unset.
    #[arg(long)]
    trials: Option<u64>,
    /// Use the small exponent ranges.
    #[arg(long)]
    fast: bool,
    /// Override the lower end of the private exponent range.
    #[arg(long)]
    exp_lo: Option<Exponent>,
    /// Override the upper end of the private exponent range.
    #[arg(long)]
    exp_hi: Option<Exponent>,
    /// Significance level for the chi-square tests.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Directory for the frequency tables and run parameters.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PairedArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest accepted Q-Q deviation, in binomial standard deviations.
    #[arg(long, default_value_t = DEFAULT_QQ_THRESHOLD)]
    qq_threshold: f64,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum ReferenceChoice {
    #[default]
    Random,
    Copy,
}

#[derive(Args, Debug)]
pub struct UniformityArgs {
    #[command(flatten)]
    paired: PairedArgs,
    /// What the second table records.
    #[arg(long, value_enum, default_value_t)]
    reference: ReferenceChoice,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum BaseModeChoice {
    #[default]
    Shared,
    PerBatch,
}

#[derive(Args, Debug)]
pub struct TripleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 4)]
    batches: u64,
    /// Whether every batch uses the same base matrix.
    #[arg(long, value_enum, default_value_t)]
    base_mode: BaseModeChoice,
}

#[derive(Serialize)]
struct RunParams<'a> {
    experiment: &'a str,
    seed: u64,
    n: u32,
    m: usize,
    k: usize,
    trials: u64,
    pair_lo: String,
    pair_hi: String,
    wide_lo: String,
    wide_hi: String,
    alpha: f64,
}

#[derive(Serialize)]
struct Row {
    experiment: &'static str,
    batch: u64,
    arm: &'static str,
    statistic: f64,
    dof: Option<u64>,
    p_value: Option<f64>,
    passed: bool,
}

impl Row {
    fn chi(
        experiment: &'static str,
        batch: u64,
        arm: &'static str,
        c: &ChiSquare,
        alpha: f64,
    ) -> Self {
        Self {
            experiment,
            batch,
            arm,
            statistic: c.statistic,
            dof: Some(c.dof),
            p_value: Some(c.p_value),
            passed: c.passes(alpha),
        }
    }
}

fn render(rows: &[Row], format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => json_line(&rows),
        Format::Csv => {
            let mut s = String::from("experiment,batch,arm,statistic,dof,p_value,passed\n");
            for r in rows {
                let dof = r.dof.map(|d| d.to_string()).unwrap_or_default();
                let p = r.p_value.map(fmt17).unwrap_or_default();
                s += &format!(
                    "{},{},{},{},{dof},{p},{}\n",
                    r.experiment,
                    r.batch,
                    r.arm,
                    fmt17(r.statistic),
                    r.passed
                );
            }
            Ok(s)
        }
    }
}

impl CommonArgs {
    fn config(&self, default_trials: u64) -> anyhow::Result<ExperimentConfig> {
        let ring = self.ring.resolve(DDH_RING);
        let seed = self.seed.resolve();
        let mut ranges = if self.fast {
            ExperimentRanges::fast()
        } else {
            ExperimentRanges::full()
        };
        if self.exp_lo.is_some() || self.exp_hi.is_some() {
            let lo = self
                .exp_lo
                .clone()
                .unwrap_or_else(|| ranges.pair.lo.clone());
            let hi = self
                .exp_hi
                .clone()
                .unwrap_or_else(|| ranges.pair.hi.clone());
            ranges.pair = ExponentRange::new(lo, hi)?;
        }
        Ok(ExperimentConfig {
            n: ring.n,
            m: ring.m,
            k: ring.k,
            trials: self.trials.unwrap_or(default_trials),
            seed,
            ranges,
        })
    }

    fn start(&self, experiment: &str, cfg: &ExperimentConfig) -> anyhow::Result<()> {
        let ring = Ring {
            n: cfg.n,
            m: cfg.m,
            k: cfg.k,
        };
        let r = &cfg.ranges;
        header(
            &format!("ddh {experiment}"),
            cfg.seed,
            Some(ring),
            &format!(
                "trials={} pair=[{},{}] wide=[{},{}]",
                cfg.trials, r.pair.lo, r.pair.hi, r.wide.lo, r.wide.hi
            ),
        );
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let params = RunParams {
                experiment,
                seed: cfg.seed,
                n: cfg.n,
                m: cfg.m,
                k: cfg.k,
                trials: cfg.trials,
                pair_lo: r.pair.lo.to_string(),
                pair_hi: r.pair.hi.to_string(),
                wide_lo: r.wide.lo.to_string(),
                wide_hi: r.wide.hi.to_string(),
                alpha: self.alpha,
            };
            std::fs::write(dir.join("params.json"), json_line(&params)?)?;
        }
        Ok(())
    }

    fn finish(&self, rows: &[Row]) -> anyhow::Result<()> {
        let text = render(rows, self.format)?;
        if let Some(dir) = &self.out {
            let name = match self.format {
                Format::Csv => "summary.csv",
                Format::Json => "summary.json",
            };
            std::fs::write(dir.join(name), &text)?;
        }
        emit(None, &text)
    }
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_paired(
    dir: &Path,
    tables: &PairedTables,
    names: [&str; 2],
    k: usize,
) -> anyhow::Result<()> {
    tables
        .first
        .write_csv(create(dir, &format!("freq_{}.csv", names[0]))?)?;
    tables
        .second
        .write_csv(create(dir, &format!("freq_{}.csv", names[1]))?)?;
    for slice in qq_pairs(&tables.first, &tables.second)? {
        let label = format!("a{}{}", slice.entry / k + 1, slice.entry % k + 1);
        slice.write_csv(create(dir, &format!("qq_{label}.csv"))?)?;
    }
    Ok(())
}

fn paired_rows(
    experiment: &'static str,
    tables: &PairedTables,
    arms: [&'static str; 2],
    alpha: f64,
    qq_threshold: f64,
) -> anyhow::Result<Vec<Row>> {
    let v = tables.verdict(alpha, qq_threshold)?;
    Ok(vec![
        Row::chi(experiment, 0, arms[0], &v.first, alpha),
        Row::chi(experiment, 0, arms[1], &v.second, alpha),
        Row {
            experiment,
            batch: 0,
            arm: "qq",
            statistic: v.qq_deviation,
            dof: None,
            p_value: None,
            passed: v.qq_deviation < qq_threshold,
        },
    ])
}

pub fn run(cmd: DdhCommand) -> anyhow::Result<()> {
    match cmd {
        DdhCommand::Exp1(a) => {
            let c = &a.common;
            let cfg = c.config(500)?;
            c.start("exp1", &cfg)?;
            let tables = exp_ddh_product(&cfg)?;
            if let Some(dir) = &c.out {
                write_paired(dir, &tables, ["mab", "mc"], cfg.k)?;
            }
            c.finish(&paired_rows(
                "exp1",
                &tables,
                ["mab", "mc"],
                c.alpha,
                a.qq_threshold,
            )?)
        }
        DdhCommand::Exp2(a) => {
            let c = &a.paired.common;
            let cfg = c.config(500)?;
            c.start("exp2", &cfg)?;
            let reference = match a.reference {
                ReferenceChoice::Random => Reference::Random,
                ReferenceChoice::Copy => Reference::CopyOfPower,
            };
            let tables = exp_uniformity(&cfg, reference)?;
            if let Some(dir) = &c.out {
                write_paired(dir, &tables, ["ma", "reference"], cfg.k)?;
            }
            let rows = paired_rows(
                "exp2",
                &tables,
                ["ma", "reference"],
                c.alpha,
                a.paired.qq_threshold,
            )?;
            c.finish(&rows)
        }
        DdhCommand::Exp3(a) => {
            let c = &a.common;
            let cfg = c.config(30_000)?;
            c.start("exp3", &cfg)?;
            let mode = match a.base_mode {
                BaseModeChoice::Shared => BaseMode::Shared,
                BaseModeChoice::PerBatch => BaseMode::PerBatch,
            };
            let mut rows = Vec::new();
            for batch in 0..a.batches {
                let table = exp_triples(&cfg, mode, batch)?;
                if let Some(dir) = &c.out {
                    table.write_csv(create(dir, &format!("triples_b{batch}.csv"))?)?;
                }
                rows.push(Row::chi(
                    "exp3",
                    batch,
                    "pooled",
                    &table.chi_square()?,
                    c.alpha,
                ));
                rows.push(Row::chi(
                    "exp3",
                    batch,
                    "rows",
                    &table.chi_square_rows()?,
                    c.alpha,
                ));
            }
            c.finish(&rows)
        }
    }
}
