//! Uniform scalar quantizers and the two dithered-quantization outputs.
//!
//! Cells are half-open on the left: `Q(w) = C_k` iff `T_k < w <= T_k+1`, so an
//! input lying exactly on a threshold belongs to the lower cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of the codebook relative to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Style {
    /// Codebook point at the origin: `C_k = kΔ`, `T_k = kΔ - Δ/2`.
    MidTread,
    /// Threshold at the origin: `C_k = kΔ + Δ/2`, `T_k = kΔ`.
    MidRiser,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Levels {
    Infinite,
    /// `2^bits` levels with indices `0..2^bits`; inputs outside the outer
    /// thresholds saturate to the extreme codebook values.
    Finite {
        bits: u8,
    },
}

/// Geometry of a uniform quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    delta: f64,
    style: Style,
    levels: Levels,
    offset: f64,
}

/// A quantizer decision: codebook index and the codebook value it maps to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedSample {
    pub index: i64,
    pub value: f64,
}

impl QuantizerSpec {
    pub fn new(delta: f64, style: Style, levels: Levels) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!(
                "quantizer step must be positive and finite, got {delta}"
            )));
        }
        if let Levels::Finite { bits } = levels {
            if !(1..=16).contains(&bits) {
                return Err(Error::Config(format!(
                    "finite quantizer needs 1..=16 bits, got {bits}"
                )));
            }
        }
        Ok(Self {
            delta,
            style,
            levels,
            offset: 0.0,
        })
    }

    /// Infinite mid-tread quantizer with step `delta`.
    pub fn mid_tread(delta: f64) -> Result<Self> {
        Self::new(delta, Style::MidTread, Levels::Infinite)
    }

    /// Infinite mid-riser quantizer with step `delta`.
    pub fn mid_riser(delta: f64) -> Result<Self> {
        Self::new(delta, Style::MidRiser, Levels::Infinite)
    }

    /// `bits`-bit mid-riser quantizer covering `[0, 1)`: `Δ = 2^-bits`,
    /// `C_k = (k + 1/2)Δ` for `k = 0..2^bits`.
    pub fn unit_mid_riser(bits: u8) -> Result<Self> {
        Self::new(
            2f64.powi(-i32::from(bits)),
            Style::MidRiser,
            Levels::Finite { bits },
        )
    }

    /// `bits`-bit mid-tread quantizer whose codebook is `k / 2^bits`, so that
    /// index `k` coincides with the native integer code `k`.
    pub fn unit_mid_tread(bits: u8) -> Result<Self> {
        Self::new(
            2f64.powi(-i32::from(bits)),
            Style::MidTread,
            Levels::Finite { bits },
        )
    }

    /// Shifts the codebook origin.
    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::Config(format!(
                "offset must be finite, got {offset}"
            )));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn style(&self) -> Style {
        self.style
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Inclusive index range of a finite quantizer, `None` when infinite.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        match self.levels {
            Levels::Infinite => None,
            Levels::Finite { bits } => Some((0, (1i64 << bits) - 1)),
        }
    }

    fn style_shift(&self) -> f64 {
        match self.style {
            Style::MidTread => 0.5,
            Style::MidRiser => 0.0,
        }
    }

    /// Codebook value `C_k`. Indices are not range-checked.
    pub fn codebook_value(&self, index: i64) -> f64 {
        self.offset + (index as f64 + 0.5 - self.style_shift()) * self.delta
    }

    /// Lower threshold `T_k` of cell `k`; `-inf` for the bottom cell of a finite quantizer.
    pub fn lower_threshold(&self, index: i64) -> f64 {
        if let Some((lo, _)) = self.index_range() {
            if index <= lo {
                return f64::NEG_INFINITY;
            }
        }
        self.offset + (index as f64 - self.style_shift()) * self.delta
    }

    /// Upper threshold `T_k+1` of cell `k`; `+inf` for the top cell of a finite quantizer.
    pub fn upper_threshold(&self, index: i64) -> f64 {
        if let Some((_, hi)) = self.index_range() {
            if index >= hi {
                return f64::INFINITY;
            }
        }
        self.offset + (index as f64 + 1.0 - self.style_shift()) * self.delta
    }

    /// Cell index for a finite `w`, saturating for finite quantizers.
    pub fn index_of(&self, w: f64) -> i64 {
        let t = (w - self.offset) / self.delta + self.style_shift();
        // `as` saturates at the i64 bounds.
        let k = (t.ceil() as i64).saturating_sub(1);
        match self.index_range() {
            Some((lo, hi)) => k.clamp(lo, hi),
            None => k,
        }
    }

    pub fn quantize(&self, w: f64) -> Result<QuantizedSample> {
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!(
                "quantizer input must be finite, got {w}"
            )));
        }
        let index = self.index_of(w);
        Ok(QuantizedSample {
            index,
            value: self.codebook_value(index),
        })
    }

    /// Non-subtractive dither output `Q(x + v)`.
    pub fn nsd_output(&self, x: f64, v: f64) -> Result<f64> {
        check_finite_pair(x, v)?;
        Ok(self.quantize(x + v)?.value)
    }

    /// Subtractive dither output `Q(x + v) - v`.
    pub fn sd_output(&self, x: f64, v: f64) -> Result<f64> {
        check_finite_pair(x, v)?;
        Ok(self.quantize(x + v)?.value - v)
    }
}

fn check_finite_pair(x: f64, v: f64) -> Result<()> {
    if x.is_finite() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "signal and dither must be finite, got x = {x}, v = {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mid_tread_examples() {
        let q = QuantizerSpec::mid_tread(1.0).unwrap();
        assert_eq!(
            q.quantize(0.0).unwrap(),
            QuantizedSample {
                index: 0,
                value: 0.0
            }
        );
        assert_eq!(
            q.quantize(0.6).unwrap(),
            QuantizedSample {
                index: 1,
                value: 1.0
            }
        );
        // Ties go to the lower cell.
        assert_eq!(q.quantize(0.5).unwrap().index, 0);
        assert_eq!(q.quantize(-0.5).unwrap().index, -1);
    }

    #[test]
    fn mid_riser_examples() {
        let q = QuantizerSpec::mid_riser(1.0).unwrap();
        assert_eq!(
            q.quantize(0.2).unwrap(),
            QuantizedSample {
                index: 0,
                value: 0.5
            }
        );
        assert_eq!(q.quantize(0.0).unwrap().value, -0.5);
        assert_eq!(q.quantize(1.0).unwrap().value, 0.5);
    }

    #[test]
    fn dithered_outputs() {
        let q = QuantizerSpec::mid_tread(1.0).unwrap();
        assert_eq!(q.nsd_output(0.3, 0.3).unwrap(), 1.0);
        assert_eq!(q.nsd_output(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(q.nsd_output(-0.3, -0.3).unwrap(), -1.0);
        assert!((q.sd_output(0.3, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!((q.sd_output(0.3, -0.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(q.sd_output(2.2, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let q = QuantizerSpec::mid_tread(1.0).unwrap();
        assert!(matches!(q.quantize(f64::NAN), Err(Error::InvalidInput(_))));
        assert!(matches!(
            q.quantize(f64::INFINITY),
            Err(Error::InvalidInput(_))
        ));
        assert!(q.nsd_output(0.0, f64::NAN).is_err());
        assert!(q.sd_output(f64::NEG_INFINITY, 0.0).is_err());
    }

    #[test]
    fn bad_configs() {
        assert!(QuantizerSpec::mid_tread(0.0).is_err());
        assert!(QuantizerSpec::mid_tread(-1.0).is_err());
        assert!(QuantizerSpec::new(1.0, Style::MidTread, Levels::Finite { bits: 0 }).is_err());
        assert!(QuantizerSpec::new(1.0, Style::MidTread, Levels::Finite { bits: 17 }).is_err());
    }

    #[test]
    fn unit_mid_riser_codebook() {
        let q = QuantizerSpec::unit_mid_riser(2).unwrap();
        let book: Vec<f64> = (0..4).map(|k| q.codebook_value(k)).collect();
        assert_eq!(book, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(q.quantize(-3.0).unwrap().value, 0.125);
        assert_eq!(q.quantize(0.25).unwrap().index, 0);
        assert_eq!(q.quantize(0.2500001).unwrap().index, 1);
        assert_eq!(q.quantize(7.0).unwrap().value, 0.875);
        assert_eq!(q.lower_threshold(0), f64::NEG_INFINITY);
        assert_eq!(q.upper_threshold(3), f64::INFINITY);
        assert_eq!(q.upper_threshold(1), 0.5);
    }

    #[test]
    fn unit_mid_tread_matches_native_codes() {
        let q = QuantizerSpec::unit_mid_tread(8).unwrap();
        for p in 0..256i64 {
            let s = q.quantize(p as f64 / 256.0).unwrap();
            assert_eq!(s.index, p);
            assert_eq!(s.value, p as f64 / 256.0);
        }
    }

    #[test]
    fn offset_shifts_codebook() {
        let q = QuantizerSpec::mid_tread(0.5)
            .unwrap()
            .with_offset(0.1)
            .unwrap();
        assert!((q.quantize(0.1).unwrap().value - 0.1).abs() < 1e-15);
        assert!((q.quantize(0.4).unwrap().value - 0.6).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn error_is_bounded_by_half_step(delta in 0.01f64..10.0, t in -10.0f64..10.0) {
            let q = QuantizerSpec::mid_tread(delta).unwrap();
            let w = t * delta;
            let y = q.quantize(w).unwrap().value;
            prop_assert!((y - w).abs() <= delta / 2.0 * (1.0 + 1e-12));
        }

        #[test]
        fn quantizer_is_monotone(a in -50.0f64..50.0, b in -50.0f64..50.0, riser in any::<bool>()) {
            let q = if riser { QuantizerSpec::mid_riser(0.7) } else { QuantizerSpec::mid_tread(0.7) }.unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(q.quantize(lo).unwrap().value <= q.quantize(hi).unwrap().value);
        }

        #[test]
        fn sd_error_is_bounded(x in -20.0f64..20.0, v in -0.5f64..0.5) {
            let q = QuantizerSpec::mid_tread(1.0).unwrap();
            let eps = q.sd_output(x, v).unwrap() + v - (x + v);
            prop_assert!(eps.abs() <= 0.5 + 1e-12);
        }

        #[test]
        fn finite_outputs_saturate(w in -1e6f64..1e6, bits in 1u8..=8) {
            let q = QuantizerSpec::unit_mid_riser(bits).unwrap();
            let (lo, hi) = q.index_range().unwrap();
            let y = q.quantize(w).unwrap().value;
            prop_assert!(y >= q.codebook_value(lo) && y <= q.codebook_value(hi));
        }

        #[test]
        fn sample_lies_in_its_cell(w in -100.0f64..100.0) {
            let q = QuantizerSpec::mid_riser(0.25).unwrap();
            let k = q.quantize(w).unwrap().index;
            prop_assert!(q.lower_threshold(k) < w && w <= q.upper_threshold(k));
        }
    }
}
