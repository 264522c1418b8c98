//! `dcdither`: trade-off tables, entropy curves and image experiments as CSV.

mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcdither::{Family, Formulation};
use serde::{Deserialize, Serialize};

use grid::Grid;

#[derive(Debug, Parser)]
#[command(
    name = "dcdither",
    version,
    about = "Distortion-controlled dithered quantization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Optimal dither parameters and figures of merit over a λ grid.
    Tradeoff(TradeoffArgs),
    /// Undithered and NSD entropy against source-to-step ratio.
    EntropyCurve(EntropyCurveArgs),
    /// Recompression entropy of the SD output over a λ grid.
    RecompressCurve(RecompressArgs),
    /// Runs the image pipeline once or over a λ grid.
    Image(ImageArgs),
    /// Writes the built-in synthetic test scene as PGM.
    SynthImage(SynthArgs),
    /// Re-runs the command recorded in a manifest.
    #[serde(skip)]
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum FamilyChoice {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "both")]
    #[serde(rename = "both")]
    Both,
}

impl FamilyChoice {
    pub fn families(self) -> Vec<Family> {
        match self {
            FamilyChoice::One => vec![Family::L1],
            FamilyChoice::Two => vec![Family::L2],
            FamilyChoice::Both => Family::ALL.to_vec(),
        }
    }
}

fn formulation(p: u8) -> Formulation {
    Formulation::from_number(p).expect("range checked by the parser")
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TradeoffArgs {
    /// Artifact formulation.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: u8,
    #[arg(long, value_enum, default_value = "both")]
    pub m: FamilyChoice,
    #[arg(long, default_value = "0:0.01:1")]
    pub lambda_grid: Grid,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EntropyCurveArgs {
    /// Dither family.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub m: u8,
    /// Formulation used for α*; defaults to p = m.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: Option<u8>,
    #[arg(long)]
    pub lambda: f64,
    /// Source width over quantizer step.
    #[arg(long, default_value = "0.05:0.05:20")]
    pub ratios: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RecompressArgs {
    /// Coarse quantizer bits; the source spans 2^b - 1 steps.
    #[arg(long, default_value_t = 2)]
    pub b: u8,
    #[arg(long, value_enum, default_value = "both")]
    pub m: FamilyChoice,
    #[arg(long, default_value = "0:0.05:1")]
    pub lambda_grid: Grid,
    /// Fine cells across the support of the decoded signal.
    #[arg(long, default_value_t = dcdither::analytic::DEFAULT_FINE_RATIO)]
    pub fine_ratio: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ImageArgs {
    /// Binary 8-bit PGM.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub b: u8,
    #[arg(long, value_enum, default_value = "both")]
    pub m: FamilyChoice,
    /// Formulation used for α*; defaults to p = m.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: Option<u8>,
    #[arg(
        long,
        conflicts_with = "lambda_grid",
        required_unless_present = "lambda_grid"
    )]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambda_grid: Option<Grid>,
    #[arg(long, env = "DCDITHER_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Autocorrelation lags in the artifact scores.
    #[arg(long, default_value_t = dcdither::imagepipe::DEFAULT_N_LAGS)]
    pub n_lags: usize,
    /// Also write stage images for every sweep point.
    #[arg(long)]
    pub save_images: bool,
    #[arg(long)]
    pub outdir: PathBuf,
}

impl ImageArgs {
    pub fn lambdas(&self) -> Vec<f64> {
        match (&self.lambda, &self.lambda_grid) {
            (Some(l), _) => vec![*l],
            (None, Some(g)) => g.values().to_vec(),
            (None, None) => unreachable!("enforced by the parser"),
        }
    }

    pub fn formulation(&self) -> Option<Formulation> {
        self.p.map(formulation)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dcdither: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
