use std::path::PathBuf;

use anyhow::{ensure, Context};
use clap::{Args, Subcommand};
use grkex_core::challenge::ChallengeSet;
use serde::Serialize;

use crate::{emit, json_line, Format};

#[derive(Subcommand)]
pub enum ChallengeCommand {
    /// Parse the three matrices and check that they survive a round trip.
    Check(CheckArgs),
    /// Rewrite the three matrices in canonical form.
    Roundtrip(RoundtripArgs),
}

/// The published matrices are used for any file not given.
#[derive(Args, Debug)]
pub struct Files {
    #[arg(long = "m", value_name = "FILE")]
    m: Option<PathBuf>,
    #[arg(long = "ma", value_name = "FILE")]
    ma: Option<PathBuf>,
    #[arg(long = "mb", value_name = "FILE")]
    mb: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    files: Files,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    #[command(flatten)]
    files: Files,
    /// Directory for `M.txt`, `Ma.txt` and `Mb.txt`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Files {
    fn load(&self) -> anyhow::Result<ChallengeSet> {
        let published = ChallengeSet::published()?;
        let read =
            |path: &Option<PathBuf>, fallback: &grkex_core::MatrixGR| -> anyhow::Result<String> {
                match path {
                    Some(p) => std::fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display())),
                    None => Ok(grkex_core::challenge::format_matrix(fallback)?),
                }
            };
        let set = ChallengeSet::parse(
            &read(&self.m, &published.m)?,
            &read(&self.ma, &published.ma)?,
            &read(&self.mb, &published.mb)?,
        )?;
        for w in &set.warnings {
            eprintln!("warning: {w}");
        }
        Ok(set)
    }
}

#[derive(Serialize)]
struct CheckReport {
    entries_parsed: usize,
    binary_coefficients: bool,
    round_trip: bool,
    pairwise_distinct: bool,
    warnings: Vec<String>,
}

pub fn run(cmd: ChallengeCommand) -> anyhow::Result<()> {
    match cmd {
        ChallengeCommand::Check(a) => {
            let set = a.files.load()?;
            let texts = set.format()?;
            let again = ChallengeSet::parse(&texts[0], &texts[1], &texts[2])?;
            let round_trip = again == set && again.format()? == texts;
            let binary_coefficients = [&set.m, &set.ma, &set.mb]
                .iter()
                .all(|m| m.coeffs().iter().all(|&c| c <= 1));
            let report = CheckReport {
                entries_parsed: 3 * set.m.dim() * set.m.dim(),
                binary_coefficients,
                round_trip,
                pairwise_distinct: set.is_distinct(),
                warnings: set.warnings.iter().map(ToString::to_string).collect(),
            };
            let text = match a.format {
                Format::Json => json_line(&report)?,
                Format::Csv => format!(
                    "entries_parsed,binary_coefficients,round_trip,pairwise_distinct,warnings\n{},{},{},{},{}\n",
                    report.entries_parsed,
                    report.binary_coefficients,
                    report.round_trip,
                    report.pairwise_distinct,
                    report.warnings.join(";")
                ),
            };
            emit(None, &text)?;
            ensure!(round_trip, "canonical text does not round-trip");
            Ok(())
        }
        ChallengeCommand::Roundtrip(a) => {
            let texts = a.files.load()?.format()?;
            match &a.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    for (name, text) in ["M.txt", "Ma.txt", "Mb.txt"].iter().zip(&texts) {
                        std::fs::write(dir.join(name), text)?;
                    }
                    Ok(())
                }
                None => emit(None, &texts.concat()),
            }
        }
    }
}
