//! The horizontal-line map `phi_y`, the critical curves `Theta` (where `DS`
//! is singular) and `Gamma = S(Theta)`, and the preimage solver.

use serde::Serialize;

use super::{MapError, RootTriple, SecantSystem};
use crate::geometry::{Point, Rect};
use crate::polynomial::Polynomial;

/// Position of the extrema of `Gamma`, seen as a graph over its first
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaShape {
    /// `gamma_0 < alpha_1`: minimum at `(gamma_0, N_p(gamma_0))`, maximum at `(xi, alpha_1)`.
    MinAtInflectionMaxAtXi,
    /// `gamma_0 > alpha_1`: maximum at `(gamma_0, N_p(gamma_0))`, minimum at `(xi, alpha_1)`.
    MaxAtInflectionMinAtXi,
    /// `gamma_0 = alpha_1`: strictly increasing with an inflection at `(alpha_1, alpha_1)`.
    IncreasingWithInflection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCurves {
    pub gamma0: f64,
    /// The ordinate with `x*(xi) = alpha_1`.
    pub xi: f64,
    pub shape: GammaShape,
    /// `(x*(y), y)` samples.
    pub theta: Vec<Point>,
    /// `(y, N_p(x*(y)))` samples, aligned with `theta`.
    pub gamma: Vec<Point>,
}

impl SecantSystem {
    /// `phi_y0(x) = y0 - p(y0) / q(x, y0)`, the second component of `S(x, y0)`.
    pub fn phi(&self, y0: f64, x: f64) -> Result<f64, MapError> {
        let py = self.p(y0);
        let q = self.q(x, y0);
        if self.is_singular(q, py) {
            return Err(MapError::Asymptote { x, y: y0 });
        }
        Ok(y0 - py / q)
    }

    /// `phi'(x) = p(y0) q_x(x, y0) / q(x, y0)^2`.
    pub fn phi_prime(&self, y0: f64, x: f64) -> Result<f64, MapError> {
        let py = self.p(y0);
        let (q, qx) = self.poly.q_with_dx(x, y0);
        if self.is_singular(q, py) {
            return Err(MapError::Asymptote { x, y: y0 });
        }
        Ok(py * qx / (q * q))
    }

    /// Vertical asymptotes of `phi_y0` in the open interval `(lo, hi)`: the
    /// zeros of `q(., y0)` there, ascending.
    pub fn phi_asymptotes(&self, y0: f64, lo: f64, hi: f64) -> Vec<f64> {
        self.poly
            .q_in_x(y0)
            .distinct_roots_in(lo, hi)
            .into_iter()
            .filter(|&x| x > lo && x < hi)
            .collect()
    }

    /// The unique zero of `x -> dq/dx(x, y)` in `(alpha_0, alpha_2)`.
    ///
    /// Requires a single inflection point `gamma_0` between the outer roots
    /// of the triple; `x*(gamma_0) = gamma_0`.
    pub fn x_star(&self, triple: &RootTriple, y: f64) -> Result<f64, MapError> {
        let gamma0 = triple.inflection.ok_or(MapError::InflectionAssumption)?;
        if y == gamma0 {
            return Ok(gamma0);
        }
        let qx: Polynomial = self.poly.q_in_x(y).derivative();
        let (lo, hi) = (triple.alpha0, triple.alpha2);
        let mut found: Vec<f64> = Vec::new();
        for r in qx.distinct_roots_in(lo, hi) {
            if r <= lo || r >= hi {
                continue;
            }
            // Numerically split roots collapse to the one with smaller |q_x|.
            match found.last_mut() {
                Some(last) if (r - *last).abs() <= 1e-9 * (1.0 + r.abs()) => {
                    if qx.eval(r).abs() < qx.eval(*last).abs() {
                        *last = r;
                    }
                }
                _ => found.push(r),
            }
        }
        match found.as_slice() {
            [x] => Ok(*x),
            _ => Err(MapError::NotUnique {
                y,
                found: found.len(),
            }),
        }
    }

    fn curve_ordinates(triple: &RootTriple, samples: usize) -> impl Iterator<Item = f64> + '_ {
        let h = (triple.alpha2 - triple.alpha0) / (samples + 1) as f64;
        (1..=samples).map(move |i| triple.alpha0 + h * i as f64)
    }

    /// `Theta` sampled as `(x*(y), y)` on a uniform grid of `y` in
    /// `(alpha_0, alpha_2)`.
    pub fn theta_curve(&self, triple: &RootTriple, samples: usize) -> Result<Vec<Point>, MapError> {
        Self::curve_ordinates(triple, samples)
            .map(|y| Ok(Point::new(self.x_star(triple, y)?, y)))
            .collect()
    }

    /// `Gamma` sampled as `(y, N_p(x*(y)))`.
    pub fn gamma_curve(&self, triple: &RootTriple, samples: usize) -> Result<Vec<Point>, MapError> {
        Self::curve_ordinates(triple, samples)
            .map(|y| Ok(Point::new(y, self.newton_map(self.x_star(triple, y)?)?)))
            .collect()
    }

    /// Solves `x*(xi) = alpha_1` by bisection; `x*` is strictly decreasing.
    pub fn xi(&self, triple: &RootTriple) -> Result<f64, MapError> {
        let g = |y: f64| -> Result<f64, MapError> { Ok(self.x_star(triple, y)? - triple.alpha1) };
        let mut lo = triple.alpha0;
        let mut hi = triple.alpha2;
        let mut g_lo = g(lo)?;
        let g_hi = g(hi)?;
        if g_lo == 0.0 {
            return Ok(lo);
        }
        if g_lo * g_hi > 0.0 {
            return Err(MapError::NotUnique {
                y: triple.alpha1,
                found: 0,
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
            let gm = g(mid)?;
            if gm == 0.0 {
                return Ok(mid);
            }
            if (gm < 0.0) == (g_lo < 0.0) {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn critical_curves(
        &self,
        triple: &RootTriple,
        samples: usize,
    ) -> Result<CriticalCurves, MapError> {
        let gamma0 = triple.inflection.ok_or(MapError::InflectionAssumption)?;
        let theta = self.theta_curve(triple, samples)?;
        let gamma = theta
            .iter()
            .map(|t| Ok(Point::new(t.y, self.newton_map(t.x)?)))
            .collect::<Result<Vec<_>, MapError>>()?;
        let xi = self.xi(triple)?;
        let tol = 1e-12 * (1.0 + triple.alpha1.abs());
        let shape = if (gamma0 - triple.alpha1).abs() <= tol {
            GammaShape::IncreasingWithInflection
        } else if gamma0 < triple.alpha1 {
            GammaShape::MinAtInflectionMaxAtXi
        } else {
            GammaShape::MaxAtInflectionMinAtXi
        };
        Ok(CriticalCurves {
            gamma0,
            xi,
            shape,
            theta,
            gamma,
        })
    }

    /// Preimages of `target = (x1, y1)` of the form `(w, x1)` inside `rect`.
    ///
    /// `S(w, x1) = (x1, y1)` iff `q(w, x1) (x1 - y1) - p(x1) = 0`, a polynomial
    /// of degree `k - 1` in `w`. Roots where `S` itself is undefined are
    /// dropped.
    pub fn preimages_in_rect(&self, target: Point, rect: &Rect) -> Result<Vec<Point>, MapError> {
        let (x1, y1) = (target.x, target.y);
        let px1 = self.p(x1);
        let eq = self
            .poly
            .q_in_x(x1)
            .scale(x1 - y1)
            .add(&Polynomial::constant(-px1));
        if eq.is_zero() {
            return Err(MapError::DegenerateTarget(target));
        }
        if !(x1 > rect.y_min && x1 < rect.y_max) {
            return Ok(Vec::new());
        }
        Ok(eq
            .distinct_roots_in(rect.x_min, rect.x_max)
            .into_iter()
            .filter(|&w| w > rect.x_min && w < rect.x_max)
            .filter(|&w| !self.is_singular(self.q(w, x1), px1))
            .map(|w| Point::new(w, x1))
            .collect())
    }
}
