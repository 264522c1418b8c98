//! Numeric grids given on the command line as `start:step:end`, a comma
//! list, or a single value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    spec: String,
    values: Vec<f64>,
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(spec: &str) -> Result<Self, String> {
        let parts: Vec<&str> = spec.split(':').collect();
        let values = match parts.as_slice() {
            [start, step, end] => {
                let (start, step, end) = (number(start)?, number(step)?, number(end)?);
                if step <= 0.0 {
                    return Err(format!("grid step must be positive, got {step}"));
                }
                if end < start {
                    return Err(format!("grid end {end} is below start {start}"));
                }
                let span = (end - start) / step;
                let n = span.round();
                if (span - n).abs() > 1e-6 {
                    return Err(format!("step {step} does not divide [{start}, {end}]"));
                }
                if n as usize >= MAX_POINTS {
                    return Err(format!("grid has more than {MAX_POINTS} points"));
                }
                let n = n as usize;
                (0..=n)
                    .map(|i| if i == n { end } else { start + i as f64 * step })
                    .collect()
            }
            [list] => list.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
            _ => {
                return Err(format!(
                    "expected start:step:end or a comma list, got '{spec}'"
                ))
            }
        };
        Ok(Self {
            spec: spec.to_string(),
            values,
        })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> Self {
        g.spec
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let g: Grid = "0:0.01:1".parse().unwrap();
        assert_eq!(g.values().len(), 101);
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(g.values()[100], 1.0);
        assert!((g.values()[37] - 0.37).abs() < 1e-15);
        let g: Grid = "0.5".parse().unwrap();
        assert_eq!(g.values(), &[0.5]);
        let g: Grid = "1, 3,9.5".parse().unwrap();
        assert_eq!(g.values(), &[1.0, 3.0, 9.5]);
    }

    #[test]
    fn bad_specs() {
        for s in [
            "", "a:b:c", "0:0:1", "1:0.1:0", "0:0.3:1", "0:1", "nan", "0:1e-9:1",
        ] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }

    #[test]
    fn serde_keeps_the_spec() {
        let g: Grid = "0:0.25:1".parse().unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "\"0:0.25:1\"");
        assert_eq!(serde_json::from_str::<Grid>(&json).unwrap(), g);
    }
}
