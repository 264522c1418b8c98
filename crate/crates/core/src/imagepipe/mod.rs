//! Low-rate grayscale compression experiment with NSD encoding and SD
//! decoding followed by 8-bit recompression.
//!
//! Encoder: pixels are normalized to `[0, 1)`, compressed into the coarse
//! quantizer's range by `x' = x(1 - Δ/2) + Δ/4`, dithered, and quantized by a
//! `b`-bit mid-riser quantizer. The coarse codes are the NSD symbols.
//!
//! Decoder: the dither is regenerated from the seed. The NSD reconstruction
//! is the codebook value, the SD reconstruction subtracts the dither. Both
//! are clamped to `[0, 1)`, mapped back through the inverse rescale and
//! requantized to 8 bits.

mod filter;
mod pgm;

pub use filter::{
    artifact_score, mse, pillbox_filter, pillbox_kernel, psnr, spatial_autocorrelation, Plane, Psnr,
};
pub use pgm::GrayImage;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dither::{optimal_alpha, DitherSpec, Family, Formulation};
use crate::error::{check_unit_interval, Error, Result};
use crate::metrics::empirical_entropy;
use crate::quantizer::QuantizerSpec;
use crate::rng;

pub const DEFAULT_N_LAGS: usize = 10;

/// Largest value below one, the top of the clamped reconstruction range.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Coarse quantizer bits.
    pub bits: u8,
    pub family: Family,
    /// Formulation used to pick `α`; the family's own when `None`.
    pub formulation: Option<Formulation>,
    pub lambda: f64,
    pub seed: u64,
    pub n_lags: usize,
}

impl PipelineConfig {
    pub fn new(bits: u8, family: Family, lambda: f64, seed: u64) -> Self {
        Self {
            bits,
            family,
            formulation: None,
            lambda,
            seed,
            n_lags: DEFAULT_N_LAGS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=7).contains(&self.bits) {
            return Err(Error::Config(format!(
                "coarse quantizer needs 1..=7 bits, got {}",
                self.bits
            )));
        }
        check_unit_interval("lambda", self.lambda).map_err(|e| Error::Config(e.to_string()))?;
        if self.n_lags == 0 {
            return Err(Error::Config("n_lags must be at least 1".into()));
        }
        Ok(())
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
            .unwrap_or_else(|| self.family.matching_formulation())
    }

    /// Coarse step `Δ = 2^-bits`.
    pub fn delta(&self) -> f64 {
        2f64.powi(-i32::from(self.bits))
    }

    /// `α* = optimal_alpha(p, m, λ)`.
    pub fn alpha(&self) -> Result<f64> {
        optimal_alpha(self.formulation(), self.family, self.lambda)
    }
}

/// Metrics of one pipeline run. Entropies are in bits per pixel, PSNR in dB,
/// MSE and artifact scores in normalized intensity units squared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub bits: u8,
    pub family: Family,
    pub formulation: Formulation,
    pub lambda: f64,
    pub alpha: f64,
    pub seed: u64,
    pub n_lags: usize,
    /// Entropy of the coarse codes.
    pub nsd_entropy: f64,
    /// Entropy of the NSD reconstruction expressed as 8-bit pixels.
    pub nsd_entropy_8bit: f64,
    /// Entropy of the 8-bit SD reconstruction.
    pub sd_recompression_entropy: f64,
    pub psnr_nsd: f64,
    pub psnr_sd: f64,
    pub mse_nsd: f64,
    pub mse_sd: f64,
    pub artifact_close_nsd: f64,
    pub artifact_close_sd: f64,
    pub artifact_far_nsd: f64,
    pub artifact_far_sd: f64,
}

/// Report plus the decoded images.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub nsd: GrayImage,
    pub sd: GrayImage,
    pub nsd_far: GrayImage,
    pub sd_far: GrayImage,
    pub original_far: GrayImage,
    /// SD reconstruction `Q(x' + v) - v` before clamping, in the rescaled domain.
    pub sd_rescaled: Vec<f64>,
    /// The rescaled input `x'`.
    pub rescaled_input: Vec<f64>,
}

fn to_gray(values: &[f64], like: &GrayImage, fine: &QuantizerSpec) -> GrayImage {
    let pixels = values
        .iter()
        .map(|&v| fine.index_of(v.clamp(0.0, BELOW_ONE)) as u8)
        .collect();
    GrayImage::new(like.width(), like.height(), pixels).expect("shape is preserved")
}

struct Scores {
    psnr: f64,
    mse: f64,
    close: f64,
    far: f64,
}

fn scores(
    decoded: &Plane,
    original: &Plane,
    original_far: &Plane,
    n_lags: usize,
) -> Result<Scores> {
    let err = decoded.difference(original)?;
    let far_err = pillbox_filter(decoded).difference(original_far)?;
    Ok(Scores {
        psnr: psnr(decoded, original)?.db(),
        mse: mse(decoded, original)?,
        close: artifact_score(&err, n_lags),
        far: artifact_score(&far_err, n_lags),
    })
}

/// Runs the encoder and decoder on `img` and measures both reconstructions.
pub fn run_pipeline(img: &GrayImage, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let delta = cfg.delta();
    let alpha = cfg.alpha()?;
    let dither = DitherSpec::new(cfg.family, alpha, delta)?;
    let coarse = QuantizerSpec::unit_mid_riser(cfg.bits)?;
    let fine = QuantizerSpec::unit_mid_tread(8)?;
    let scale = 1.0 - 0.5 * delta;
    let shift = 0.25 * delta;
    let unscale = |y: f64| (y.clamp(0.0, BELOW_ONE) - shift) / scale;

    let original = Plane::normalized(img);
    let rescaled_input: Vec<f64> = original.data.iter().map(|x| x * scale + shift).collect();

    let mut rng = rng::stream(cfg.seed, 0);
    let n = rescaled_input.len();
    let mut codes = Vec::with_capacity(n);
    let mut nsd_values = Vec::with_capacity(n);
    let mut sd_rescaled = Vec::with_capacity(n);
    let mut sd_values = Vec::with_capacity(n);
    for &x in &rescaled_input {
        let v = dither.sample(&mut rng);
        let k = coarse.index_of(x + v);
        let c = coarse.codebook_value(k);
        codes.push(k);
        nsd_values.push(unscale(c));
        sd_rescaled.push(c - v);
        sd_values.push(unscale(c - v));
    }

    let nsd = to_gray(&nsd_values, img, &fine);
    let sd = to_gray(&sd_values, img, &fine);
    let nsd_plane = Plane::normalized(&nsd);
    let sd_plane = Plane::normalized(&sd);
    let original_far = pillbox_filter(&original);
    let nsd_scores = scores(&nsd_plane, &original, &original_far, cfg.n_lags)?;
    let sd_scores = scores(&sd_plane, &original, &original_far, cfg.n_lags)?;

    let far_gray = |p: &Plane| to_gray(&p.data, img, &fine);
    let report = PipelineReport {
        bits: cfg.bits,
        family: cfg.family,
        formulation: cfg.formulation(),
        lambda: cfg.lambda,
        alpha,
        seed: cfg.seed,
        n_lags: cfg.n_lags,
        nsd_entropy: empirical_entropy(codes.iter().copied())?,
        nsd_entropy_8bit: empirical_entropy(nsd.pixels().iter().copied())?,
        sd_recompression_entropy: empirical_entropy(sd.pixels().iter().copied())?,
        psnr_nsd: nsd_scores.psnr,
        psnr_sd: sd_scores.psnr,
        mse_nsd: nsd_scores.mse,
        mse_sd: sd_scores.mse,
        artifact_close_nsd: nsd_scores.close,
        artifact_close_sd: sd_scores.close,
        artifact_far_nsd: nsd_scores.far,
        artifact_far_sd: sd_scores.far,
    };
    Ok(PipelineOutput {
        report,
        nsd_far: far_gray(&pillbox_filter(&nsd_plane)),
        sd_far: far_gray(&pillbox_filter(&sd_plane)),
        original_far: far_gray(&original_far),
        nsd,
        sd,
        sd_rescaled,
        rescaled_input,
    })
}

/// Parameters shared by every point of a λ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub bits: u8,
    pub families: Vec<Family>,
    /// `None` pairs each family with its own formulation.
    pub formulation: Option<Formulation>,
    pub lambdas: Vec<f64>,
    pub seed: u64,
    pub n_lags: usize,
}

/// One report per `(family, λ)`, ordered by family then grid position.
///
/// Every point reuses the dither stream of `seed`, so reports differ only
/// through `m` and `λ`.
pub fn lambda_sweep(img: &GrayImage, sweep: &SweepConfig) -> Result<Vec<PipelineReport>> {
    if sweep.families.is_empty() || sweep.lambdas.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one family and one λ".into(),
        ));
    }
    let configs: Vec<PipelineConfig> = sweep
        .families
        .iter()
        .flat_map(|&family| {
            sweep.lambdas.iter().map(move |&lambda| PipelineConfig {
                bits: sweep.bits,
                family,
                formulation: sweep.formulation,
                lambda,
                seed: sweep.seed,
                n_lags: sweep.n_lags,
            })
        })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    configs
        .par_iter()
        .map(|cfg| run_pipeline(img, cfg).map(|out| out.report))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> GrayImage {
        GrayImage::synthetic(96, 80).unwrap()
    }

    #[test]
    fn config_validation() {
        let img = scene();
        for (bits, lambda) in [(0, 0.5), (8, 0.5), (2, -0.1), (2, 1.5)] {
            let cfg = PipelineConfig::new(bits, Family::L1, lambda, 1);
            assert!(matches!(run_pipeline(&img, &cfg), Err(Error::Config(_))));
        }
        let mut cfg = PipelineConfig::new(2, Family::L1, 0.5, 1);
        cfg.n_lags = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn alpha_follows_the_formulation() {
        let mut cfg = PipelineConfig::new(2, Family::L2, 0.5, 0);
        assert_eq!(cfg.alpha().unwrap(), 0.5);
        cfg.formulation = Some(Formulation::L1);
        assert!((cfg.alpha().unwrap() - 1.5 / 3.5).abs() < 1e-15);
    }

    #[test]
    fn without_dither_sd_equals_nsd() {
        let img = scene();
        let out = run_pipeline(&img, &PipelineConfig::new(2, Family::L1, 0.0, 3)).unwrap();
        assert_eq!(out.nsd, out.sd);
        let r = &out.report;
        assert_eq!(r.mse_nsd, r.mse_sd);
        assert!(r.sd_recompression_entropy <= 2.0 + 1e-12);
        assert!((r.sd_recompression_entropy - r.nsd_entropy).abs() < 1e-12);
    }

    #[test]
    fn full_dither_families_coincide() {
        let img = scene();
        let a = run_pipeline(&img, &PipelineConfig::new(2, Family::L1, 1.0, 9)).unwrap();
        let b = run_pipeline(&img, &PipelineConfig::new(2, Family::L2, 1.0, 9)).unwrap();
        assert_eq!(a.sd, b.sd);
        assert_eq!(a.nsd, b.nsd);
        let (mut ra, rb) = (a.report.clone(), b.report.clone());
        ra.family = rb.family;
        ra.formulation = rb.formulation;
        assert_eq!(ra, rb);
    }

    #[test]
    fn runs_are_deterministic() {
        let img = scene();
        let cfg = PipelineConfig::new(3, Family::L1, 0.4, 17);
        let a = run_pipeline(&img, &cfg).unwrap();
        let b = run_pipeline(&img, &cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.sd, b.sd);
        assert_eq!(a.sd_far, b.sd_far);
        let c = run_pipeline(&img, &PipelineConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(a.sd, c.sd);
    }

    #[test]
    fn sd_reconstruction_error_is_bounded() {
        let img = scene();
        for bits in [1, 2, 4] {
            let cfg = PipelineConfig::new(bits, Family::L2, 0.7, 5);
            let out = run_pipeline(&img, &cfg).unwrap();
            let half = 0.5 * cfg.delta();
            for (y, x) in out.sd_rescaled.iter().zip(&out.rescaled_input) {
                let err = (y - x).abs();
                // Near the range ends x + v can reach a saturating outer cell.
                let interior = (half..=1.0 - half).contains(x);
                let bound = if interior { half } else { 1.5 * half };
                assert!(err <= bound * (1.0 + 1e-12), "{y} vs {x}");
            }
        }
    }

    #[test]
    fn coarse_alphabet_is_small() {
        let img = scene();
        for bits in 1..=4u8 {
            let out = run_pipeline(&img, &PipelineConfig::new(bits, Family::L1, 0.5, 2)).unwrap();
            let r = out.report;
            assert!(r.nsd_entropy <= f64::from(bits) + 1e-12);
            let mut levels: Vec<u8> = out.nsd.pixels().to_vec();
            levels.sort_unstable();
            levels.dedup();
            assert!(levels.len() <= 1 << bits);
        }
    }

    #[test]
    fn sweep_is_ordered_and_matches_single_runs() {
        let img = scene();
        let sweep = SweepConfig {
            bits: 2,
            families: vec![Family::L1, Family::L2],
            formulation: None,
            lambdas: vec![0.0, 0.5, 1.0],
            seed: 4,
            n_lags: 5,
        };
        let rows = lambda_sweep(&img, &sweep).unwrap();
        assert_eq!(rows.len(), 6);
        let mut cfg = PipelineConfig::new(2, Family::L2, 0.5, 4);
        cfg.n_lags = 5;
        assert_eq!(rows[4], run_pipeline(&img, &cfg).unwrap().report);
        assert!(rows[..3].iter().all(|r| r.family == Family::L1));
    }

    #[test]
    fn far_images_are_smooth_versions() {
        let img = GrayImage::new(4, 3, vec![100; 12]).unwrap();
        let out = run_pipeline(&img, &PipelineConfig::new(2, Family::L1, 0.0, 0)).unwrap();
        assert_eq!(out.original_far, img);
    }
}
