//! Tabulated forward-force distribution over (heading angle, sail angle).
//!
//! A [`SailForceMap`] stores the forward force the sail produces for
//! every pair of heading angle θ (map row, degrees) and sail angular
//! coordinate Φ (map column, degrees). One map is kept per tack side;
//! the left-side map is the mirror image of the right-side map under
//! (θ, Φ) → (-θ mod 360°, 360°-Φ).
//!
//! Maps round-trip through a plain CSV schema so empirically measured
//! data can replace the built-in analytic model.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Which tack the map was measured (or generated) for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TackSide {
    Right,
    Left,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("grid must have at least two strictly ascending uniform entries")]
    BadGrid,
    #[error("value matrix dimensions do not match grids")]
    DimensionMismatch,
    #[error("non-finite value in map")]
    NonFinite,
    #[error("theta {theta} outside map range [{min}, {max}]")]
    ThetaOutOfRange { theta: f64, min: f64, max: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("map step must be positive and divide its range evenly")]
    BadStep,
    #[error("wind speed must be positive")]
    BadWind,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Forward-force table over a uniform (θ, Φ) grid, in newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct SailForceMap {
    pub tack_side: TackSide,
    /// Heading angles in degrees, ascending, uniform step.
    pub theta_grid: Vec<f64>,
    /// Sail angular coordinates in [0, 360) degrees, ascending, uniform step.
    pub phi_grid: Vec<f64>,
    /// values[i][j] = forward force at (theta_grid[i], phi_grid[j]).
    pub values: Vec<Vec<f64>>,
}

fn check_uniform(grid: &[f64]) -> Result<(), MapError> {
    if grid.len() < 2 {
        return Err(MapError::BadGrid);
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return Err(MapError::BadGrid);
    }
    for w in grid.windows(2) {
        let d = w[1] - w[0];
        if !(d > 0.0) || (d - step).abs() > 1e-9 * step.max(1.0) {
            return Err(MapError::BadGrid);
        }
    }
    Ok(())
}

impl SailForceMap {
    /// Build a map after validating grid and matrix invariants.
    pub fn new(
        tack_side: TackSide,
        theta_grid: Vec<f64>,
        phi_grid: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, MapError> {
        check_uniform(&theta_grid)?;
        check_uniform(&phi_grid)?;
        if values.len() != theta_grid.len() {
            return Err(MapError::DimensionMismatch);
        }
        for row in &values {
            if row.len() != phi_grid.len() {
                return Err(MapError::DimensionMismatch);
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MapError::NonFinite);
            }
        }
        Ok(Self {
            tack_side,
            theta_grid,
            phi_grid,
            values,
        })
    }

    fn theta_bracket(&self, theta_deg: f64) -> Result<(usize, usize, f64), MapError> {
        let min = *self.theta_grid.first().unwrap();
        let max = *self.theta_grid.last().unwrap();
        if !theta_deg.is_finite() || theta_deg < min || theta_deg > max {
            return Err(MapError::ThetaOutOfRange {
                theta: theta_deg,
                min,
                max,
            });
        }
        let step = self.theta_grid[1] - self.theta_grid[0];
        let lo = (((theta_deg - min) / step).floor() as usize).min(self.theta_grid.len() - 2);
        let w = (theta_deg - self.theta_grid[lo]) / step;
        Ok((lo, lo + 1, w))
    }

    /// Forward force at a heading angle and sail angle, interpolating
    /// linearly between the two bracketing θ rows (nearest Φ column).
    pub fn force_at(&self, theta_deg: f64, phi_deg: f64) -> Result<f64, MapError> {
        let (lo, hi, w) = self.theta_bracket(theta_deg)?;
        let pstep = self.phi_grid[1] - self.phi_grid[0];
        let p0 = self.phi_grid[0];
        let j = (((phi_deg - p0) / pstep).round() as isize)
            .rem_euclid(self.phi_grid.len() as isize) as usize;
        Ok((1.0 - w) * self.values[lo][j] + w * self.values[hi][j])
    }

    /// Sail angle that maximizes the interpolated forward force at the
    /// given heading angle, with its value. Ties break toward smaller Φ.
    pub fn optimal_sail_angle(&self, theta_deg: f64) -> Result<(f64, f64), MapError> {
        let (lo, hi, w) = self.theta_bracket(theta_deg)?;
        let mut best_j = 0usize;
        let mut best = f64::NEG_INFINITY;
        for j in 0..self.phi_grid.len() {
            let v = (1.0 - w) * self.values[lo][j] + w * self.values[hi][j];
            if v > best {
                best = v;
                best_j = j;
            }
        }
        Ok((self.phi_grid[best_j], best))
    }

    /// Serialize to the force-map CSV schema: header `theta_deg,<phi...>`,
    /// one row per θ. Values are written with full round-trip precision.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str("theta_deg");
        for p in &self.phi_grid {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
        for (i, t) in self.theta_grid.iter().enumerate() {
            let _ = write!(out, "{t}");
            for v in &self.values[i] {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the force-map CSV schema. `side` is supplied by the caller;
    /// the file format itself carries no tack-side marker.
    pub fn from_csv_str(s: &str, side: TackSide) -> Result<Self, MapError> {
        let mut lines = s.lines().enumerate();
        let (_, header) = lines.next().ok_or(MapError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let mut cols = header.split(',');
        match cols.next() {
            Some("theta_deg") => {}
            _ => {
                return Err(MapError::Parse {
                    line: 1,
                    msg: "header must start with `theta_deg`".into(),
                })
            }
        }
        let phi_grid: Vec<f64> = cols
            .map(|c| {
                c.trim().parse::<f64>().map_err(|e| MapError::Parse {
                    line: 1,
                    msg: format!("bad phi value `{c}`: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        let mut theta_grid = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let theta: f64 = fields
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|e| MapError::Parse {
                    line: lineno,
                    msg: format!("bad theta value: {e}"),
                })?;
            let row: Vec<f64> = fields
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|e| MapError::Parse {
                        line: lineno,
                        msg: format!("bad force value `{c}`: {e}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if row.len() != phi_grid.len() {
                return Err(MapError::Parse {
                    line: lineno,
                    msg: format!(
                        "row has {} values, header has {} phi columns",
                        row.len(),
                        phi_grid.len()
                    ),
                });
            }
            theta_grid.push(theta);
            values.push(row);
        }
        Self::new(side, theta_grid, phi_grid, values).map_err(|e| match e {
            MapError::BadGrid => MapError::Parse {
                line: 1,
                msg: "grid is not strictly ascending and uniform".into(),
            },
            other => other,
        })
    }
}

/// Write a map to a CSV file (UTF-8, LF line endings).
pub fn save_map_csv(map: &SailForceMap, path: &Path) -> Result<(), MapError> {
    fs::write(path, map.to_csv_string())?;
    Ok(())
}

/// Load a map from a CSV file.
pub fn load_map_csv(path: &Path, side: TackSide) -> Result<SailForceMap, MapError> {
    let s = fs::read_to_string(path)?;
    SailForceMap::from_csv_str(&s, side)
}
