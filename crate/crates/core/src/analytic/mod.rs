//! Exact entropy of dithered quantizer outputs for a uniform source.
//!
//! The source is `X ~ U(-u/2, u/2)` and the quantizer is uniform with step
//! `Δ`. Because the dither families only contain atoms and uniform pieces,
//! every density here is piecewise linear plus atoms, and all probabilities
//! are integrated in closed form.

mod density;

pub use density::{Atom, CellPmf, MixtureDensity, Segment};

pub(crate) use density::entropy_bits;

use serde::{Deserialize, Serialize};

use crate::dither::{optimal_alpha, DitherSpec, Family};
use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

/// Default number of fine cells spanning the support of the decoded signal.
pub const DEFAULT_FINE_RATIO: u32 = 256;

/// Density of `X + V` for `X ~ U(-u/2, u/2)` and dither `d`.
pub fn convolve_with_uniform_source(u: f64, d: &DitherSpec) -> Result<MixtureDensity> {
    d.pdf().convolve_uniform(u)
}

pub fn cell_probabilities(density: &MixtureDensity, q: &QuantizerSpec) -> Result<CellPmf> {
    density.cell_probabilities(q)
}

/// Entropy of a cell PMF in bits per sample.
pub fn pmf_entropy(pmf: &CellPmf) -> f64 {
    pmf.entropy_bits()
}

/// One point of the entropy-versus-resolution curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    /// `u / Δ`.
    pub ratio: f64,
    /// `H(Q(X))`.
    pub undithered_bps: f64,
    /// `H(Q(X + V))`.
    pub nsd_bps: f64,
}

/// Undithered and NSD entropies of an infinite mid-tread quantizer with the
/// dither's step, for each source width `ratio · Δ`.
pub fn nsd_entropy_curve(ratios: &[f64], d: &DitherSpec) -> Result<Vec<EntropyPoint>> {
    let delta = d.delta();
    let q = QuantizerSpec::mid_tread(delta)?;
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "resolution ratio must be positive, got {ratio}"
                )));
            }
            let u = ratio * delta;
            let plain = MixtureDensity::uniform(-0.5 * u, 0.5 * u);
            let dithered = convolve_with_uniform_source(u, d)?;
            Ok(EntropyPoint {
                ratio,
                undithered_bps: plain.cell_probabilities(&q)?.entropy_bits(),
                nsd_bps: dithered.cell_probabilities(&q)?.entropy_bits(),
            })
        })
        .collect()
}

/// Length of `[a, b] ∩ [lo, hi]`.
fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

/// Exact density of the subtractive-dither output `Y = Q(X + V) - V` for
/// `X ~ U(-u/2, u/2)`.
///
/// For each reachable cell `k`, an atom of `V` at `a` yields an atom of `Y`
/// at `C_k - a`, and a uniform piece of `V` yields `Y` values
/// `C_k - v` weighted by `P(T_k - v < X <= T_k+1 - v)`, which is piecewise
/// linear in `y`.
pub fn sd_output_density(u: f64, d: &DitherSpec, q: &QuantizerSpec) -> Result<MixtureDensity> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::InvalidInput(format!(
            "source width must be positive, got {u}"
        )));
    }
    let dither = d.pdf();
    let (v_lo, v_hi) = dither.support().expect("dither density is never empty");
    let (x_lo, x_hi) = (-0.5 * u, 0.5 * u);
    let k_first = q.index_of(x_lo + v_lo);
    let k_last = q.index_of(x_hi + v_hi);

    let mut atoms = Vec::new();
    let mut segments = Vec::new();
    for k in k_first..=k_last {
        let c = q.codebook_value(k);
        let t_lo = q.lower_threshold(k);
        let t_hi = q.upper_threshold(k);
        for a in dither.atoms() {
            let p = overlap(t_lo - a.location, t_hi - a.location, x_lo, x_hi) / u;
            if p > 0.0 {
                atoms.push(Atom {
                    location: c - a.location,
                    weight: a.weight * p,
                });
            }
        }
        for s in dither.segments() {
            if !s.is_constant() {
                return Err(Error::InvalidInput(
                    "dither segments must be uniform".into(),
                ));
            }
            let h = s.density_lo;
            let y_lo = c - s.hi;
            let y_hi = c - s.lo;
            // X must fall in [T_k - C_k + y, T_k+1 - C_k + y].
            let density = |y: f64| h * overlap(t_lo - c + y, t_hi - c + y, x_lo, x_hi) / u;
            let mut knots = vec![y_lo, y_hi];
            for t in [t_lo, t_hi] {
                for x in [x_lo, x_hi] {
                    let y = x - t + c;
                    if y.is_finite() && y > y_lo && y < y_hi {
                        knots.push(y);
                    }
                }
            }
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            for pair in knots.windows(2) {
                let seg = Segment {
                    lo: pair[0],
                    hi: pair[1],
                    density_lo: density(pair[0]),
                    density_hi: density(pair[1]),
                };
                if seg.weight() > 0.0 {
                    segments.push(seg);
                }
            }
        }
    }
    Ok(MixtureDensity::from_parts(atoms, segments).merged())
}

/// Source width used for a `bits`-bit coarse quantizer: `u/Δ = 2^bits - 1`,
/// so that `X + V` with `|V| <= Δ/2` reaches `2^bits` levels.
pub fn source_ratio_for_bits(bits: u8) -> f64 {
    ((1u64 << bits) - 1) as f64
}

/// Entropy of the SD output `Y` after requantization with a mid-tread
/// quantizer whose step is `width(support Y) / fine_ratio`, still with
/// infinitely many levels.
pub fn recompression_entropy_for(u: f64, d: &DitherSpec, fine_ratio: u32) -> Result<f64> {
    if fine_ratio == 0 {
        return Err(Error::InvalidInput("fine ratio must be positive".into()));
    }
    let coarse = QuantizerSpec::mid_tread(d.delta())?;
    let y = sd_output_density(u, d, &coarse)?;
    let (lo, hi) = y.support().expect("output density is never empty");
    let width = hi - lo;
    if width == 0.0 {
        return Ok(0.0);
    }
    let fine = QuantizerSpec::mid_tread(width / f64::from(fine_ratio))?;
    Ok(y.cell_probabilities(&fine)?.entropy_bits())
}

/// Recompression entropy of a `bits`-bit SD quantizer using family `m` at
/// `α*_m,m(λ)`.
pub fn recompression_entropy(bits: u8, m: Family, lambda: f64, fine_ratio: u32) -> Result<f64> {
    if !(1..=16).contains(&bits) {
        return Err(Error::Domain {
            name: "bits",
            value: f64::from(bits),
            domain: "1..=16",
        });
    }
    let alpha = optimal_alpha(m.matching_formulation(), m, lambda)?;
    let d = DitherSpec::new(m, alpha, 1.0)?;
    recompression_entropy_for(source_ratio_for_bits(bits), &d, fine_ratio)
}
