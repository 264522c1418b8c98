//! Error statistics of non-subtractively dithered quantizers.
//!
//! The numeric figures integrate exact conditional moments over one
//! quantizer cell; the empirical figures come from simulated sequences.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{entropy_bits, MixtureDensity};
use crate::dither::DitherSpec;
use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

/// `(E[ε | x], E[ε² | x])` for `ε = Q(x + V) - x` with `V ~ dither`.
pub fn conditional_moments(q: &QuantizerSpec, dither: &MixtureDensity, x: f64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    dither.for_each_cell_mass(q, x, |k, mass| {
        let e = q.codebook_value(k) - x;
        mean += mass * e;
        second += mass * e * e;
    });
    (mean, second)
}

/// Conditional mean error `E[ε_NS | x]`.
pub fn conditional_error(q: &QuantizerSpec, d: &DitherSpec, x: f64) -> f64 {
    conditional_moments(q, &d.pdf(), x).0
}

/// MSE, MACE² and MSCE for an input uniform over one interior cell,
/// in signal units squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericFigures {
    pub mse: f64,
    pub mace2: f64,
    pub msce: f64,
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1]; exact through degree 9.
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    128.0 / 225.0,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gauss_legendre(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
}

/// Integrates `f` over `[a, b]` and checks the result against the same rule
/// on two halves. Returns the refined value.
fn checked_integral(a: f64, b: f64, f: &impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let whole = gauss_legendre(a, b, f);
    let mid = 0.5 * (a + b);
    let split = gauss_legendre(a, mid, f) + gauss_legendre(mid, b, f);
    if (whole - split).abs() > tol {
        return Err(Error::Numeric(format!(
            "quadrature on [{a}, {b}] did not settle: {whole} vs {split} (tolerance {tol})"
        )));
    }
    Ok(split)
}

/// Cell used for the uniform-input averages: cell 0 of an infinite
/// quantizer, the middle cell of a finite one.
fn reference_cell(q: &QuantizerSpec) -> (f64, f64) {
    let k = q.index_range().map_or(0, |(lo, hi)| (lo + hi + 1) / 2);
    (q.lower_threshold(k), q.upper_threshold(k))
}

/// Points in `[lo, hi]` where some atom or segment edge of the dither,
/// shifted by `x`, crosses a quantizer threshold. Between consecutive points
/// the conditional moments are polynomials in `x`.
fn breakpoints(q: &QuantizerSpec, dither: &MixtureDensity, lo: f64, hi: f64) -> Vec<f64> {
    let (v_lo, v_hi) = dither.support().expect("dither density is never empty");
    let edges: Vec<f64> = dither
        .atoms()
        .iter()
        .map(|a| a.location)
        .chain(dither.segments().iter().flat_map(|s| [s.lo, s.hi]))
        .collect();
    let mut points = vec![lo, hi, 0.5 * (lo + hi)];
    for k in q.index_of(lo + v_lo) - 1..=q.index_of(hi + v_hi) + 1 {
        let t = q.upper_threshold(k);
        if !t.is_finite() {
            continue;
        }
        for e in &edges {
            let x = t - e;
            if x > lo && x < hi {
                points.push(x);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Roots in `(a, b)` of a function that is quadratic on the interval,
/// recovered from three interior samples.
fn quadratic_roots(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> Vec<f64> {
    let at = |t: f64| f(a + t * (b - a));
    let (f1, f2, f3) = (at(0.25), at(0.5), at(0.75));
    // p(t) = c0 + c1 (t - 1/2) + c2 (t - 1/2)²
    let c0 = f2;
    let c1 = 2.0 * (f3 - f1);
    let c2 = 8.0 * (f1 + f3 - 2.0 * f2);
    let scale = f1.abs().max(f2.abs()).max(f3.abs());
    let mut roots = Vec::new();
    if c2.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        if c1 != 0.0 {
            roots.push(0.5 - c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push(0.5 + (-c1 - sq) / (2.0 * c2));
            roots.push(0.5 + (-c1 + sq) / (2.0 * c2));
        }
    }
    roots
        .into_iter()
        .filter(|t| *t > 0.0 && *t < 1.0)
        .map(|t| a + t * (b - a))
        .collect()
}

/// MSE, MACE² and MSCE by quadrature of the exact conditional moments over
/// one cell, split at every discontinuity and kink of the integrands.
pub fn numeric_figures(q: &QuantizerSpec, d: &DitherSpec) -> Result<NumericFigures> {
    let dither = d.pdf();
    let (lo, hi) = reference_cell(q);
    let width = hi - lo;
    let tol = 1e-12 * q.delta() * q.delta();
    let mean = |x: f64| conditional_moments(q, &dither, x).0;
    let second = |x: f64| conditional_moments(q, &dither, x).1;
    let mean_sq = |x: f64| {
        let m = conditional_moments(q, &dither, x).0;
        m * m
    };
    let mean_abs = |x: f64| conditional_moments(q, &dither, x).0.abs();

    let mut mse = 0.0;
    let mut abs_mean = 0.0;
    let mut msce = 0.0;
    for piece in breakpoints(q, &dither, lo, hi).windows(2) {
        let (a, b) = (piece[0], piece[1]);
        mse += checked_integral(a, b, &second, tol)?;
        msce += checked_integral(a, b, &mean_sq, tol)?;
        let mut cuts = vec![a];
        cuts.extend(quadratic_roots(a, b, &mean));
        cuts.push(b);
        for sub in cuts.windows(2) {
            abs_mean += checked_integral(sub[0], sub[1], &mean_abs, tol)?;
        }
    }
    let mace = abs_mean / width;
    Ok(NumericFigures {
        mse: mse / width,
        mace2: mace * mace,
        msce: msce / width,
    })
}

pub fn mse_numeric(q: &QuantizerSpec, d: &DitherSpec) -> Result<f64> {
    Ok(numeric_figures(q, d)?.mse)
}

pub fn mace2_numeric(q: &QuantizerSpec, d: &DitherSpec) -> Result<f64> {
    Ok(numeric_figures(q, d)?.mace2)
}

pub fn msce_numeric(q: &QuantizerSpec, d: &DitherSpec) -> Result<f64> {
    Ok(numeric_figures(q, d)?.msce)
}

/// Empirical statistics of a simulated NSD error sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub n_samples: usize,
    pub mse: f64,
    /// `r(n)` for lags `n = 1..=N`, biased normalization.
    pub autocorr: Vec<f64>,
    /// Mean absolute autocorrelation.
    pub artifact_r1: f64,
    /// Root mean square autocorrelation.
    pub artifact_r2: f64,
    /// `(mean_i |E[ε | x_i]|)²` over the input samples.
    pub mace2: f64,
    /// `mean_i E[ε | x_i]²` over the input samples.
    pub msce: f64,
    /// Standard error of one autocorrelation lag for white error, `mse / sqrt(n)`.
    pub standard_error: f64,
}

/// Biased sample autocorrelation `(1/L) Σ e_i e_i+n` for `n = 1..=n_lags`.
pub fn autocorrelation(errors: &[f64], n_lags: usize) -> Vec<f64> {
    let len = errors.len() as f64;
    (1..=n_lags)
        .map(|n| {
            if n >= errors.len() {
                return 0.0;
            }
            errors
                .iter()
                .zip(&errors[n..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / len
        })
        .collect()
}

/// `(mean |r|, sqrt(mean r²))`.
pub fn autocorrelation_norms(autocorr: &[f64]) -> (f64, f64) {
    if autocorr.is_empty() {
        return (0.0, 0.0);
    }
    let n = autocorr.len() as f64;
    let l1 = autocorr.iter().map(|r| r.abs()).sum::<f64>() / n;
    let l2 = (autocorr.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    (l1, l2)
}

/// Dithers and quantizes `x_seq` with one fresh dither draw per sample and
/// summarizes the NSD error `Q(x + v) - x`.
pub fn empirical_error_stats<R: Rng + ?Sized>(
    x_seq: &[f64],
    q: &QuantizerSpec,
    d: &DitherSpec,
    n_lags: usize,
    rng: &mut R,
) -> Result<ErrorStats> {
    if n_lags == 0 {
        return Err(Error::InvalidInput("need at least one lag".into()));
    }
    if x_seq.len() < 100 * n_lags {
        return Err(Error::InvalidInput(format!(
            "sequence of {} samples is too short for {n_lags} lags (need {})",
            x_seq.len(),
            100 * n_lags
        )));
    }
    let dither = d.pdf();
    let mut errors = Vec::with_capacity(x_seq.len());
    let mut abs_cond = 0.0;
    let mut sq_cond = 0.0;
    for &x in x_seq {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite input sample {x}")));
        }
        let v = d.sample(rng);
        errors.push(q.codebook_value(q.index_of(x + v)) - x);
        let (m, _) = conditional_moments(q, &dither, x);
        abs_cond += m.abs();
        sq_cond += m * m;
    }
    let n = x_seq.len() as f64;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
    let autocorr = autocorrelation(&errors, n_lags);
    let (artifact_r1, artifact_r2) = autocorrelation_norms(&autocorr);
    let mace = abs_cond / n;
    Ok(ErrorStats {
        n_samples: x_seq.len(),
        mse,
        autocorr,
        artifact_r1,
        artifact_r2,
        mace2: mace * mace,
        msce: sq_cond / n,
        standard_error: mse / n.sqrt(),
    })
}

/// Plug-in entropy of a symbol sequence in bits per sample.
pub fn empirical_entropy<T, I>(symbols: I) -> Result<f64>
where
    T: Eq + Hash,
    I: IntoIterator<Item = T>,
{
    let mut counts: HashMap<T, u64> = HashMap::new();
    let mut total = 0u64;
    for s in symbols {
        *counts.entry(s).or_insert(0) += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::InvalidInput("entropy of an empty sequence".into()));
    }
    let n = total as f64;
    // Sorted so the sum does not depend on hash order or labels.
    let mut counts: Vec<u64> = counts.into_values().collect();
    counts.sort_unstable();
    Ok(entropy_bits(counts.into_iter().map(|c| c as f64 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dither::{artifact_closed_form, cost_closed_form, Family, Formulation};
    use crate::rng;
    use rand::Rng;

    fn mid_tread() -> QuantizerSpec {
        QuantizerSpec::mid_tread(1.0).unwrap()
    }

    #[test]
    fn conditional_error_examples() {
        let q = mid_tread();
        let full = DitherSpec::full(1.0).unwrap();
        for i in 0..=20 {
            let x = -3.0 + 0.3 * i as f64;
            assert!(conditional_error(&q, &full, x).abs() < 1e-14);
        }
        let none = DitherSpec::none(1.0).unwrap();
        assert!((conditional_error(&q, &none, 0.3) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn conditional_error_matches_monte_carlo() {
        let q = mid_tread();
        let d = DitherSpec::new(Family::L2, 0.5, 1.0).unwrap();
        let x = 0.3;
        let exact = conditional_error(&q, &d, x);
        let mut r = rng::stream(11, 0);
        let n = 10_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let e = q.codebook_value(q.index_of(x + d.sample(&mut r))) - x;
            sum += e;
            sum_sq += e * e;
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        assert!(
            (mean - exact).abs() < 4.0 * sd / (n as f64).sqrt(),
            "{mean} vs {exact}"
        );
    }

    #[test]
    fn conditional_error_is_odd() {
        let q = mid_tread();
        for m in Family::ALL {
            for alpha in [0.0, 0.3, 0.7, 1.0] {
                let d = DitherSpec::new(m, alpha, 1.0).unwrap();
                for i in 1..40 {
                    let x = i as f64 * 0.037;
                    let a = conditional_error(&q, &d, x);
                    let b = conditional_error(&q, &d, -x);
                    assert!((a + b).abs() < 1e-14, "m={m} alpha={alpha} x={x}");
                }
            }
        }
    }

    #[test]
    fn classical_numeric_values() {
        let q = QuantizerSpec::mid_tread(0.5).unwrap();
        let none = numeric_figures(&q, &DitherSpec::none(0.5).unwrap()).unwrap();
        assert!((none.mse - 0.25 / 12.0).abs() < 1e-14);
        let full = numeric_figures(&q, &DitherSpec::full(0.5).unwrap()).unwrap();
        assert!((full.mse - 0.25 / 6.0).abs() < 1e-14);
        assert!(full.mace2 < 1e-20 && full.msce < 1e-20);
    }

    #[test]
    fn numeric_values_match_closed_forms() {
        for q in [
            QuantizerSpec::mid_tread(1.0).unwrap(),
            QuantizerSpec::mid_riser(1.0).unwrap(),
        ] {
            for m in Family::ALL {
                for alpha in [0.0, 0.25, 0.5, 0.8, 1.0] {
                    let f = numeric_figures(&q, &DitherSpec::new(m, alpha, 1.0).unwrap()).unwrap();
                    assert!((f.mse - cost_closed_form(m, alpha).unwrap()).abs() < 1e-9);
                    let a1 = artifact_closed_form(Formulation::L1, m, alpha).unwrap();
                    let a2 = artifact_closed_form(Formulation::L2, m, alpha).unwrap();
                    assert!((f.mace2 - a1).abs() < 1e-9, "m={m} alpha={alpha}");
                    assert!((f.msce - a2).abs() < 1e-9, "m={m} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn autocorrelation_of_constant_error() {
        let q = mid_tread();
        let none = DitherSpec::none(1.0).unwrap();
        let x = vec![0.3; 10_000];
        let stats = empirical_error_stats(&x, &q, &none, 10, &mut rng::stream(0, 0)).unwrap();
        for (i, r) in stats.autocorr.iter().enumerate() {
            let n = (i + 1) as f64;
            let expect = 0.09 * (1.0 - n / 10_000.0);
            assert!((r - expect).abs() < 1e-12);
        }
        assert!((stats.mse - 0.09).abs() < 1e-12);
        assert!((stats.mace2 - 0.09).abs() < 1e-12);
    }

    #[test]
    fn full_dither_error_is_white() {
        let q = mid_tread();
        let full = DitherSpec::full(1.0).unwrap();
        let mut r = rng::stream(77, 0);
        let x: Vec<f64> = (0..1_000_000)
            .map(|_| r.random_range(-10.0..10.0))
            .collect();
        let stats = empirical_error_stats(&x, &q, &full, 10, &mut r).unwrap();
        let band = 3.0 * (1.0 / 6.0) / (x.len() as f64).sqrt();
        for r in &stats.autocorr {
            assert!(r.abs() < band, "{r} outside ±{band}");
        }
        assert!((stats.mse - 1.0 / 6.0).abs() < 0.01 / 6.0);
    }

    #[test]
    fn jensen_bound_holds_empirically() {
        let q = mid_tread();
        let d = DitherSpec::new(Family::L2, 0.5, 1.0).unwrap();
        let mut r = rng::stream(3, 9);
        let x: Vec<f64> = (0..200_000).map(|_| r.random_range(-0.5..0.5)).collect();
        let s = empirical_error_stats(&x, &q, &d, 10, &mut r).unwrap();
        assert!(s.artifact_r1 <= s.mace2 + 5.0 * s.standard_error);
        assert!(s.artifact_r2 <= s.msce + 5.0 * s.standard_error);
    }

    #[test]
    fn short_sequences_are_rejected() {
        let q = mid_tread();
        let d = DitherSpec::full(1.0).unwrap();
        let x = vec![0.0; 999];
        assert!(empirical_error_stats(&x, &q, &d, 10, &mut rng::stream(0, 0)).is_err());
        assert!(empirical_error_stats(&x, &q, &d, 0, &mut rng::stream(0, 0)).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(empirical_entropy([5i64; 100]).unwrap(), 0.0);
        assert!((empirical_entropy([0i64, 1, 0, 1]).unwrap() - 1.0).abs() < 1e-15);
        assert!((empirical_entropy(0..=255u8).unwrap() - 8.0).abs() < 1e-12);
        assert!(empirical_entropy(Vec::<i64>::new()).is_err());
    }

    #[test]
    fn entropy_ignores_labels() {
        let a = [1i64, 1, 2, 3, 3, 3, 7];
        let b: Vec<i64> = a.iter().map(|s| 100 - 3 * s).collect();
        assert_eq!(empirical_entropy(a).unwrap(), empirical_entropy(b).unwrap());
    }

    #[test]
    fn autocorrelation_norms_follow_definition() {
        let (l1, l2) = autocorrelation_norms(&[0.3, -0.4]);
        assert!((l1 - 0.35).abs() < 1e-15);
        assert!((l2 - (0.125f64).sqrt()).abs() < 1e-15);
    }
}
