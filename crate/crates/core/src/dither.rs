//! Parametric dither families, their closed-form objective values and the
//! optimal mixing parameter for a given trade-off weight.
//!
//! All closed-form values are normalized to `Δ²`.
//!
//! * Family 1: with probability `α`, uniform on `[-αΔ/2, αΔ/2]`; otherwise one
//!   of the two endpoints `±αΔ/2` with equal probability.
//! * Family 2: uniform on `[-αΔ/2, αΔ/2]`.
//!
//! At `α = 0` both reduce to no dither and at `α = 1` both are the full
//! rectangular dither of width `Δ`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{Atom, MixtureDensity, Segment};
use crate::error::{check_unit_interval, Error, Result};

/// Dither distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Uniform core plus two endpoint atoms, optimal for the ℓ1 formulation.
    L1,
    /// Narrowed rectangular dither, optimal for the ℓ2 formulation.
    L2,
}

/// Artifact measure used in the trade-off: `1` selects MACE², `2` selects MSCE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formulation {
    L1,
    L2,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::L1, Family::L2];

    pub fn number(self) -> u8 {
        match self {
            Family::L1 => 1,
            Family::L2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Family::L1),
            2 => Ok(Family::L2),
            _ => Err(Error::Config(format!(
                "dither family must be 1 or 2, got {n}"
            ))),
        }
    }

    /// The formulation this family is tuned for.
    pub fn matching_formulation(self) -> Formulation {
        match self {
            Family::L1 => Formulation::L1,
            Family::L2 => Formulation::L2,
        }
    }
}

impl Formulation {
    pub const ALL: [Formulation; 2] = [Formulation::L1, Formulation::L2];

    pub fn number(self) -> u8 {
        match self {
            Formulation::L1 => 1,
            Formulation::L2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Formulation::L1),
            2 => Ok(Formulation::L2),
            _ => Err(Error::Config(format!(
                "formulation must be 1 or 2, got {n}"
            ))),
        }
    }

    pub fn matching_family(self) -> Family {
        match self {
            Formulation::L1 => Family::L1,
            Formulation::L2 => Family::L2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A member of one of the two dither families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherSpec {
    family: Family,
    alpha: f64,
    delta: f64,
}

impl DitherSpec {
    pub fn new(family: Family, alpha: f64, delta: f64) -> Result<Self> {
        check_unit_interval("alpha", alpha)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                domain: "(0, inf)",
            });
        }
        Ok(Self {
            family,
            alpha,
            delta,
        })
    }

    /// No dither.
    pub fn none(delta: f64) -> Result<Self> {
        Self::new(Family::L2, 0.0, delta)
    }

    /// Rectangular dither spanning one quantization step.
    pub fn full(delta: f64) -> Result<Self> {
        Self::new(Family::L2, 1.0, delta)
    }

    /// Family `family` at the optimal `α` for formulation `p` and weight `lambda`.
    pub fn optimal(p: Formulation, family: Family, lambda: f64, delta: f64) -> Result<Self> {
        Self::new(family, optimal_alpha(p, family, lambda)?, delta)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest dither magnitude, `αΔ/2`.
    pub fn amplitude(&self) -> f64 {
        0.5 * self.alpha * self.delta
    }

    /// Maps one uniform draw `u ∈ [0, 1)` to a dither value.
    ///
    /// Family 1 uses `u < α` to select the uniform core and rescales the
    /// remainder for the atom choice, so both families consume exactly one
    /// draw per sample and coincide at `α = 1`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        let width = self.alpha * self.delta;
        match self.family {
            Family::L2 => width * (u - 0.5),
            Family::L1 => {
                if u < self.alpha {
                    width * (u / self.alpha - 0.5)
                } else if (u - self.alpha) / (1.0 - self.alpha) < 0.5 {
                    -0.5 * width
                } else {
                    0.5 * width
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(rng.random::<f64>())
    }

    /// Exact density as atoms plus a uniform segment; zero-weight parts omitted.
    pub fn pdf(&self) -> MixtureDensity {
        let half = self.amplitude();
        if half == 0.0 {
            return MixtureDensity::point_mass(0.0);
        }
        match self.family {
            Family::L2 => MixtureDensity::uniform(-half, half),
            Family::L1 => {
                let atom_weight = 0.5 * (1.0 - self.alpha);
                let atoms = if atom_weight > 0.0 {
                    vec![
                        Atom {
                            location: -half,
                            weight: atom_weight,
                        },
                        Atom {
                            location: half,
                            weight: atom_weight,
                        },
                    ]
                } else {
                    Vec::new()
                };
                let segments = if self.alpha > 0.0 {
                    vec![Segment::uniform(-half, half, self.alpha)]
                } else {
                    Vec::new()
                };
                MixtureDensity::from_parts(atoms, segments)
            }
        }
    }
}

/// MSE of non-subtractive dithering with family `m`, in units of `Δ²`.
pub fn cost_closed_form(m: Family, alpha: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    let a = alpha;
    Ok(match m {
        Family::L1 => (-2.0 * a * a * a + 3.0 * a * a + 1.0) / 12.0,
        Family::L2 => (a * a + 1.0) / 12.0,
    })
}

/// Artifact bound (MACE² for `p = 1`, MSCE for `p = 2`), in units of `Δ²`.
pub fn artifact_closed_form(p: Formulation, m: Family, alpha: f64) -> Result<f64> {
    check_unit_interval("alpha", alpha)?;
    let r = 1.0 - alpha;
    Ok(match (p, m) {
        (Formulation::L1, Family::L1) => r.powi(4) / 16.0,
        (Formulation::L2, Family::L1) => r.powi(3) / 12.0,
        (Formulation::L1, Family::L2) => r * r / 16.0,
        (Formulation::L2, Family::L2) => r * r / 12.0,
    })
}

/// Minimizer over `α` of `(1-λ)·cost + λ·artifact`.
pub fn optimal_alpha(p: Formulation, m: Family, lambda: f64) -> Result<f64> {
    check_unit_interval("lambda", lambda)?;
    let l = lambda;
    Ok(match (p, m) {
        // (1 - sqrt(1 - λ²)) / λ, rationalized so λ = 0 gives the limit 0.
        (Formulation::L1, Family::L1) => l / (1.0 + (1.0 - l * l).sqrt()),
        (Formulation::L2, Family::L1) => l / (2.0 - l),
        (Formulation::L1, Family::L2) => 3.0 * l / (4.0 - l),
        (Formulation::L2, Family::L2) => l,
    })
}

/// Trade-off objective `(1-λ)·C_m(α) + λ·A_p,m(α)`.
pub fn objective(p: Formulation, m: Family, alpha: f64, lambda: f64) -> Result<f64> {
    check_unit_interval("lambda", lambda)?;
    Ok((1.0 - lambda) * cost_closed_form(m, alpha)? + lambda * artifact_closed_form(p, m, alpha)?)
}

/// Closed-form figures of one family evaluated at its optimal `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub formulation: Formulation,
    pub family: Family,
    pub alpha_star: f64,
    /// MSE.
    pub cost: f64,
    /// MACE².
    pub artifact_l1: f64,
    /// MSCE.
    pub artifact_l2: f64,
    pub objective: f64,
}

impl TradeoffPoint {
    pub fn evaluate(p: Formulation, m: Family, lambda: f64) -> Result<Self> {
        let alpha_star = optimal_alpha(p, m, lambda)?;
        Ok(Self {
            lambda,
            formulation: p,
            family: m,
            alpha_star,
            cost: cost_closed_form(m, alpha_star)?,
            artifact_l1: artifact_closed_form(Formulation::L1, m, alpha_star)?,
            artifact_l2: artifact_closed_form(Formulation::L2, m, alpha_star)?,
            objective: objective(p, m, alpha_star, lambda)?,
        })
    }

    /// Artifact value of the point's own formulation.
    pub fn artifact(&self) -> f64 {
        match self.formulation {
            Formulation::L1 => self.artifact_l1,
            Formulation::L2 => self.artifact_l2,
        }
    }
}

/// Evaluates both families at their optimal `α` for every `λ` in the grid.
/// Rows are ordered by grid position, then family.
pub fn pareto_front(p: Formulation, lambda_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    let mut rows = Vec::with_capacity(2 * lambda_grid.len());
    for &lambda in lambda_grid {
        for m in Family::ALL {
            rows.push(TradeoffPoint::evaluate(p, m, lambda)?);
        }
    }
    Ok(rows)
}
