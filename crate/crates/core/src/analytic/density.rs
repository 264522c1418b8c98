//! Exact densities made of point masses and piecewise-linear segments.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

const MASS_TOLERANCE: f64 = 1e-10;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// A degree-one density piece on `[lo, hi]`, stored by its endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub density_lo: f64,
    pub density_hi: f64,
}

impl Segment {
    pub fn uniform(lo: f64, hi: f64, weight: f64) -> Self {
        let h = weight / (hi - lo);
        Self {
            lo,
            hi,
            density_lo: h,
            density_hi: h,
        }
    }

    pub fn weight(&self) -> f64 {
        0.5 * (self.hi - self.lo) * (self.density_lo + self.density_hi)
    }

    pub fn is_constant(&self) -> bool {
        self.density_lo == self.density_hi
    }

    /// Density at `x`, zero outside `[lo, hi]`.
    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        let t = (x - self.lo) / (self.hi - self.lo);
        self.density_lo + t * (self.density_hi - self.density_lo)
    }

    /// Mass of the segment inside `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if b <= a {
            return 0.0;
        }
        0.5 * (b - a) * (self.density_at(a) + self.density_at(b))
    }
}

/// Probability density as a sum of point masses and linear segments.
///
/// Segments may overlap; the density is their sum. [`MixtureDensity::merged`]
/// rewrites a density onto disjoint segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixtureDensity {
    atoms: Vec<Atom>,
    segments: Vec<Segment>,
}

impl MixtureDensity {
    /// Builds a density, checking nonnegativity, ordering and unit mass.
    pub fn new(atoms: Vec<Atom>, segments: Vec<Segment>) -> Result<Self> {
        for a in &atoms {
            if !(a.location.is_finite() && a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::InvalidInput(format!("bad atom {a:?}")));
            }
        }
        for s in &segments {
            let finite = [s.lo, s.hi, s.density_lo, s.density_hi]
                .iter()
                .all(|v| v.is_finite());
            if !finite || s.lo >= s.hi || s.density_lo < 0.0 || s.density_hi < 0.0 {
                return Err(Error::InvalidInput(format!("bad segment {s:?}")));
            }
        }
        let density = Self { atoms, segments };
        let mass = density.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "density has total mass {mass}, expected 1"
            )));
        }
        Ok(density)
    }

    pub(crate) fn from_parts(atoms: Vec<Atom>, segments: Vec<Segment>) -> Self {
        Self { atoms, segments }
    }

    pub fn point_mass(location: f64) -> Self {
        Self::from_parts(
            vec![Atom {
                location,
                weight: 1.0,
            }],
            Vec::new(),
        )
    }

    /// Uniform density on `[lo, hi]`; a point mass when the interval is degenerate.
    pub fn uniform(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Self::from_parts(Vec::new(), vec![Segment::uniform(lo, hi, 1.0)])
        } else {
            Self::point_mass(lo)
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>()
            + self.segments.iter().map(Segment::weight).sum::<f64>()
    }

    /// Smallest closed interval holding all mass.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lows = self
            .atoms
            .iter()
            .map(|a| a.location)
            .chain(self.segments.iter().map(|s| s.lo));
        let highs = self
            .atoms
            .iter()
            .map(|a| a.location)
            .chain(self.segments.iter().map(|s| s.hi));
        let lo = lows.fold(f64::INFINITY, f64::min);
        let hi = highs.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// Value of the continuous part at `x`, taking right limits at knots.
    /// Atoms are not included.
    pub fn pdf(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.lo <= x && x < s.hi)
            .map(|s| s.density_at(x))
            .sum()
    }

    /// `P(a < Z <= b)`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|t| a < t.location && t.location <= b)
            .map(|t| t.weight)
            .sum();
        atoms
            + self
                .segments
                .iter()
                .map(|s| s.mass_between(a, b))
                .sum::<f64>()
    }

    /// Density of `Z + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self::from_parts(
            self.atoms
                .iter()
                .map(|a| Atom {
                    location: a.location + shift,
                    ..*a
                })
                .collect(),
            self.segments
                .iter()
                .map(|s| Segment {
                    lo: s.lo + shift,
                    hi: s.hi + shift,
                    ..*s
                })
                .collect(),
        )
    }

    /// Density of `-Z`.
    pub fn reflected(&self) -> Self {
        Self::from_parts(
            self.atoms
                .iter()
                .map(|a| Atom {
                    location: -a.location,
                    weight: a.weight,
                })
                .collect(),
            self.segments
                .iter()
                .map(|s| Segment {
                    lo: -s.hi,
                    hi: -s.lo,
                    density_lo: s.density_hi,
                    density_hi: s.density_lo,
                })
                .collect(),
        )
    }

    /// Canonical form: atoms sorted and merged by location, segments rewritten
    /// onto a sorted breakpoint set, zero-weight parts dropped.
    pub fn merged(&self) -> Self {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.weight > 0.0)
            .collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged_atoms: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged_atoms.last_mut() {
                Some(last) if last.location == a.location => last.weight += a.weight,
                _ => merged_atoms.push(a),
            }
        }

        let live: Vec<&Segment> = self
            .segments
            .iter()
            .filter(|s| s.hi > s.lo && s.weight() > 0.0)
            .collect();
        let mut breaks: Vec<f64> = live.iter().flat_map(|s| [s.lo, s.hi]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut segments = Vec::new();
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mut d_lo = 0.0;
            let mut d_hi = 0.0;
            for s in live.iter().filter(|s| s.lo <= lo && hi <= s.hi) {
                d_lo += s.density_at(lo);
                d_hi += s.density_at(hi);
            }
            if d_lo > 0.0 || d_hi > 0.0 {
                segments.push(Segment {
                    lo,
                    hi,
                    density_lo: d_lo,
                    density_hi: d_hi,
                });
            }
        }
        Self::from_parts(merged_atoms, segments)
    }

    /// Exact density of `Z + X` with `X` uniform on `[-width/2, width/2]`.
    ///
    /// Atoms become uniform segments and constant segments become trapezoids.
    /// Densities with sloped segments are rejected since their convolution
    /// leaves the piecewise-linear class.
    pub fn convolve_uniform(&self, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "uniform width must be positive, got {width}"
            )));
        }
        let half = 0.5 * width;
        let mut segments = Vec::new();
        for a in &self.atoms {
            if a.weight > 0.0 {
                segments.push(Segment::uniform(
                    a.location - half,
                    a.location + half,
                    a.weight,
                ));
            }
        }
        for s in &self.segments {
            if !s.is_constant() {
                return Err(Error::InvalidInput(
                    "convolution with a uniform needs piecewise-constant input".into(),
                ));
            }
            let short = (s.hi - s.lo).min(width);
            let peak = s.density_lo * short / width;
            let rise_end = s.lo - half + short;
            let fall_start = s.hi + half - short;
            segments.push(Segment {
                lo: s.lo - half,
                hi: rise_end,
                density_lo: 0.0,
                density_hi: peak,
            });
            if fall_start > rise_end {
                segments.push(Segment {
                    lo: rise_end,
                    hi: fall_start,
                    density_lo: peak,
                    density_hi: peak,
                });
            }
            segments.push(Segment {
                lo: fall_start,
                hi: s.hi + half,
                density_lo: peak,
                density_hi: 0.0,
            });
        }
        Ok(Self::from_parts(Vec::new(), segments).merged())
    }

    /// Calls `f(k, mass)` with the mass of `Z + shift` in each quantizer cell
    /// the density touches. A cell may be reported more than once.
    pub(crate) fn for_each_cell_mass(
        &self,
        q: &QuantizerSpec,
        shift: f64,
        mut f: impl FnMut(i64, f64),
    ) {
        for a in &self.atoms {
            f(q.index_of(a.location + shift), a.weight);
        }
        for s in &self.segments {
            let lo = s.lo + shift;
            let hi = s.hi + shift;
            let k_lo = q.index_of(lo);
            let k_hi = q.index_of(hi);
            for k in k_lo..=k_hi {
                let a = q.lower_threshold(k).max(lo) - shift;
                let b = q.upper_threshold(k).min(hi) - shift;
                let m = s.mass_between(a, b);
                if m > 0.0 {
                    f(k, m);
                }
            }
        }
    }

    /// Probability of each quantizer cell, `P(T_k < Z <= T_k+1)`.
    pub fn cell_probabilities(&self, q: &QuantizerSpec) -> Result<CellPmf> {
        match self.support() {
            Some((lo, hi)) if lo.is_finite() && hi.is_finite() => {}
            Some(_) => {
                return Err(Error::InvalidInput(
                    "cell probabilities need a bounded support".into(),
                ))
            }
            None => return Err(Error::InvalidInput("density is empty".into())),
        }
        let mut cells: BTreeMap<i64, f64> = BTreeMap::new();
        self.for_each_cell_mass(q, 0.0, |k, m| *cells.entry(k).or_insert(0.0) += m);
        Ok(CellPmf {
            entries: cells.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        })
    }
}

/// Probability mass function over quantizer cell indices, sorted by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellPmf {
    pub entries: Vec<(i64, f64)>,
}

impl CellPmf {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }

    pub fn probability(&self, index: i64) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(k, _)| k)
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(self.entries.iter().map(|&(_, p)| p))
    }
}

pub(crate) fn entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    -probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}
