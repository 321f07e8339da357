use serde::Serialize;

use super::{MapError, SecantSystem};
use crate::geometry::Point;

/// The 0/0 point `Q_{i,j} = (alpha_i, alpha_j)`, `i != j`. Arcs through it
/// are mapped onto its prefocal line `x = alpha_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocalPoint {
    pub i: usize,
    pub j: usize,
    pub location: Point,
    pub prefocal_x: f64,
}

/// Slope of an arc through a focal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Finite(f64),
    Vertical,
}

impl SecantSystem {
    /// All `n (n - 1)` ordered pairs of distinct roots.
    pub fn focal_points(&self) -> Vec<FocalPoint> {
        let r = self.roots.roots();
        let mut out = Vec::with_capacity(r.len() * r.len().saturating_sub(1));
        for (i, &ai) in r.iter().enumerate() {
            for (j, &aj) in r.iter().enumerate() {
                if i != j {
                    out.push(FocalPoint {
                        i,
                        j,
                        location: Point::new(ai, aj),
                        prefocal_x: aj,
                    });
                }
            }
        }
        out
    }

    /// Landing ordinate on the prefocal line of an arc reaching `focal` with
    /// slope `m`:
    /// `y(m) = (a_j p'(a_i) - a_i p'(a_j) m) / (p'(a_i) - p'(a_j) m)`.
    pub fn slope_to_landing(&self, focal: &FocalPoint, m: Slope) -> Result<f64, MapError> {
        let (ai, aj) = (focal.location.x, focal.location.y);
        match m {
            Slope::Vertical => Ok(ai),
            Slope::Finite(m) => {
                let di = self.dp(ai);
                let dj = self.dp(aj);
                let den = di - dj * m;
                if den.abs() <= 1e-14 * (di.abs() + (dj * m).abs()) {
                    return Err(MapError::PoleSlope(m));
                }
                Ok((aj * di - ai * dj * m) / den)
            }
        }
    }

    /// Inverse of [`slope_to_landing`](Self::slope_to_landing):
    /// `m(y) = p'(a_i) (a_j - y) / (p'(a_j) (a_i - y))`.
    pub fn landing_to_slope(&self, focal: &FocalPoint, y: f64) -> Slope {
        let (ai, aj) = (focal.location.x, focal.location.y);
        let den = self.dp(aj) * (ai - y);
        if den == 0.0 {
            Slope::Vertical
        } else {
            Slope::Finite(self.dp(ai) * (aj - y) / den)
        }
    }
}
