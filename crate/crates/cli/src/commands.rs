//! Subcommand implementations and the run manifest.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dcdither::analytic::{nsd_entropy_curve, recompression_entropy};
use dcdither::dither::{optimal_alpha, pareto_front, TradeoffPoint};
use dcdither::imagepipe::{
    lambda_sweep, run_pipeline, GrayImage, PipelineConfig, PipelineReport, SweepConfig,
};
use dcdither::{DitherSpec, Family};
use serde::{Deserialize, Serialize};

use crate::output::{create_dir, g9, write_atomic, Table};
use crate::{
    formulation, Command, EntropyCurveArgs, ImageArgs, RecompressArgs, SynthArgs, TradeoffArgs,
};

pub const REPORT_HEADER: [&str; 13] = [
    "m",
    "lambda",
    "alpha",
    "nsd_entropy_bps",
    "sd_recomp_entropy_bps",
    "psnr_nsd_db",
    "psnr_sd_db",
    "mse_nsd",
    "mse_sd",
    "artifact_close_nsd",
    "artifact_close_sd",
    "artifact_far_nsd",
    "artifact_far_sd",
];

#[derive(Debug)]
pub enum CliError {
    Core(dcdither::Error),
    Io(io::Error),
    Manifest(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use dcdither::Error as E;
        match self {
            CliError::Core(E::InvalidInput(_) | E::Domain { .. } | E::Config(_)) => 2,
            CliError::Core(E::Format(_)) | CliError::Manifest(_) => 3,
            CliError::Core(E::Numeric(_)) => 4,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Manifest(msg) => write!(f, "bad manifest: {msg}"),
        }
    }
}

impl From<dcdither::Error> for CliError {
    fn from(e: dcdither::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Command,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new(parameters: &Command, outputs: Vec<PathBuf>) -> Self {
        let (subcommand, seed) = match parameters {
            Command::Tradeoff(_) => ("tradeoff", None),
            Command::EntropyCurve(_) => ("entropy-curve", None),
            Command::RecompressCurve(_) => ("recompress-curve", None),
            Command::Image(a) => ("image", Some(a.seed)),
            Command::SynthImage(_) => ("synth-image", None),
            Command::Replay { .. } => unreachable!("replays are never recorded"),
        };
        Self {
            subcommand: subcommand.into(),
            parameters: parameters.clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs,
        }
    }

    fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_atomic(path, json.as_bytes())?;
        Ok(())
    }

    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }
}

fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Writes a CSV table to `out` (with a manifest next to it) or to stdout.
fn emit(table: Table, out: Option<&Path>, cmd: &Command) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, &table.into_bytes())?;
            RunManifest::new(cmd, vec![path.to_path_buf()]).save(&manifest_path_for(path))
        }
        None => {
            io::stdout().write_all(&table.into_bytes())?;
            Ok(())
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match &cmd {
        Command::Tradeoff(a) => emit(tradeoff(a)?, a.out.as_deref(), &cmd),
        Command::EntropyCurve(a) => emit(entropy_curve(a)?, a.out.as_deref(), &cmd),
        Command::RecompressCurve(a) => emit(recompress_curve(a)?, a.out.as_deref(), &cmd),
        Command::Image(a) => image(a, &cmd),
        Command::SynthImage(a) => synth_image(a, &cmd),
        Command::Replay { manifest } => replay(manifest),
    }
}

fn replay(path: &Path) -> Result<()> {
    let manifest = RunManifest::load(path)?;
    if matches!(manifest.parameters, Command::Replay { .. }) {
        return Err(CliError::Manifest(
            "a manifest cannot replay another manifest".into(),
        ));
    }
    let version = env!("CARGO_PKG_VERSION");
    if manifest.version != version {
        eprintln!(
            "dcdither: manifest was written by version {}, replaying with {version}",
            manifest.version
        );
    }
    run(manifest.parameters)
}

fn tradeoff(a: &TradeoffArgs) -> Result<Table> {
    let p = formulation(a.p);
    let mut table = Table::new(&[
        "lambda",
        "m",
        "alpha_star",
        "mse",
        "mace2",
        "msce",
        "objective",
    ]);
    let families = a.m.families();
    let rows: Vec<TradeoffPoint> = if families.len() == 2 {
        pareto_front(p, a.lambda_grid.values())?
    } else {
        a.lambda_grid
            .values()
            .iter()
            .map(|&l| TradeoffPoint::evaluate(p, families[0], l))
            .collect::<dcdither::Result<_>>()?
    };
    for r in rows {
        table.row(&[
            g9(r.lambda),
            r.family.to_string(),
            g9(r.alpha_star),
            g9(r.cost),
            g9(r.artifact_l1),
            g9(r.artifact_l2),
            g9(r.objective),
        ]);
    }
    Ok(table)
}

fn entropy_curve(a: &EntropyCurveArgs) -> Result<Table> {
    let m = Family::from_number(a.m)?;
    let p = a.p.map(formulation).unwrap_or(m.matching_formulation());
    let d = DitherSpec::optimal(p, m, a.lambda, 1.0)?;
    let mut table = Table::new(&["ratio", "h_undithered_bps", "h_nsd_bps"]);
    for pt in nsd_entropy_curve(a.ratios.values(), &d)? {
        table.row(&[g9(pt.ratio), g9(pt.undithered_bps), g9(pt.nsd_bps)]);
    }
    Ok(table)
}

fn recompress_curve(a: &RecompressArgs) -> Result<Table> {
    let mut table = Table::new(&["lambda", "m", "alpha_star", "recomp_entropy_bps"]);
    for &lambda in a.lambda_grid.values() {
        for m in a.m.families() {
            let alpha = optimal_alpha(m.matching_formulation(), m, lambda)?;
            let h = recompression_entropy(a.b, m, lambda, a.fine_ratio)?;
            table.row(&[g9(lambda), m.to_string(), g9(alpha), g9(h)]);
        }
    }
    Ok(table)
}

fn report_row(r: &PipelineReport) -> Vec<String> {
    vec![
        r.family.to_string(),
        g9(r.lambda),
        g9(r.alpha),
        g9(r.nsd_entropy),
        g9(r.sd_recompression_entropy),
        g9(r.psnr_nsd),
        g9(r.psnr_sd),
        g9(r.mse_nsd),
        g9(r.mse_sd),
        g9(r.artifact_close_nsd),
        g9(r.artifact_close_sd),
        g9(r.artifact_far_nsd),
        g9(r.artifact_far_sd),
    ]
}

fn write_pgm(path: PathBuf, img: &GrayImage, outputs: &mut Vec<PathBuf>) -> Result<()> {
    write_atomic(&path, &img.to_pgm_bytes())?;
    outputs.push(path);
    Ok(())
}

fn image(a: &ImageArgs, cmd: &Command) -> Result<()> {
    let img = GrayImage::load_pgm(&a.input)?;
    let families = a.m.families();
    let lambdas = a.lambdas();
    let config = |family, lambda| PipelineConfig {
        bits: a.b,
        family,
        formulation: a.formulation(),
        lambda,
        seed: a.seed,
        n_lags: a.n_lags,
    };
    for &l in &lambdas {
        config(families[0], l).validate()?;
    }
    create_dir(&a.outdir)?;
    let mut outputs = Vec::new();
    let single = families.len() * lambdas.len() == 1;

    let reports = if single || a.save_images {
        let mut reports = Vec::new();
        for &family in &families {
            for &lambda in &lambdas {
                let out = run_pipeline(&img, &config(family, lambda))?;
                let prefix = if single {
                    String::new()
                } else {
                    format!("m{family}_l{}_", g9(lambda))
                };
                let stages = [
                    ("nsd", &out.nsd),
                    ("sd", &out.sd),
                    ("nsd_far", &out.nsd_far),
                    ("sd_far", &out.sd_far),
                ];
                for (name, stage) in stages {
                    write_pgm(
                        a.outdir.join(format!("{prefix}{name}.pgm")),
                        stage,
                        &mut outputs,
                    )?;
                }
                if reports.is_empty() {
                    write_pgm(
                        a.outdir.join("original_far.pgm"),
                        &out.original_far,
                        &mut outputs,
                    )?;
                }
                reports.push(out.report);
            }
        }
        reports
    } else {
        lambda_sweep(
            &img,
            &SweepConfig {
                bits: a.b,
                families,
                formulation: a.formulation(),
                lambdas,
                seed: a.seed,
                n_lags: a.n_lags,
            },
        )?
    };

    let mut table = Table::new(&REPORT_HEADER);
    for r in &reports {
        table.row(&report_row(r));
    }
    let report_path = a.outdir.join("report.csv");
    write_atomic(&report_path, &table.into_bytes())?;
    outputs.push(report_path);
    RunManifest::new(cmd, outputs).save(&a.outdir.join("manifest.json"))
}

fn synth_image(a: &SynthArgs, cmd: &Command) -> Result<()> {
    let img = GrayImage::synthetic(a.width, a.height)?;
    write_atomic(&a.out, &img.to_pgm_bytes())?;
    RunManifest::new(cmd, vec![a.out.clone()]).save(&manifest_path_for(&a.out))
}
