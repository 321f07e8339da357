//! The secant method viewed as the plane map
//! `S(x, y) = (y, y - p(y) / q(x, y))`.
//!
//! The map is undefined on the singular set `delta_S = {q = 0}`; every
//! operation that divides by `q` reports proximity to it through
//! [`MapError::Singular`] (or the more specific [`MapError::Asymptote`]).

mod critical;
mod focal;
mod jacobian;

pub use critical::{CriticalCurves, GammaShape};
pub use focal::{FocalPoint, Slope};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Point;
use crate::polynomial::{PolyError, Polynomial, RootSet, MAX_DEGREE};

pub const DEFAULT_SING_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: u32 = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("({}, {}) is on the singular set (q vanishes)", .0.x, .0.y)]
    Singular(Point),
    #[error("p'({0}) vanishes; the Newton map is undefined")]
    CriticalPoint(f64),
    #[error("slope {0} lands at infinity on the prefocal line")]
    PoleSlope(f64),
    #[error("phi_{y} has a vertical asymptote at x = {x}")]
    Asymptote { x: f64, y: f64 },
    #[error("expected a unique zero of dq/dx(., {y}) in the interval, found {found}")]
    NotUnique { y: f64, found: usize },
    #[error("p has no unique inflection point between the neighbouring roots")]
    InflectionAssumption,
    #[error("root {0} is not internal (needs a real root on each side)")]
    NotInternal(usize),
    #[error("target ({}, {}) is a fixed point; every (w, x) is a preimage", .0.x, .0.y)]
    DegenerateTarget(Point),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Iteration limits for [`SecantSystem::orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitParams {
    pub max_iter: u32,
    /// Convergence radius around `(alpha, alpha)` in the max norm.
    pub tol: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "root", rename_all = "snake_case")]
pub enum OrbitOutcome {
    Converged(usize),
    NonConverged,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitResult {
    pub outcome: OrbitOutcome,
    pub iterations: u32,
    pub last: Point,
}

/// Three consecutive simple roots `alpha_0 < alpha_1 < alpha_2`; the open
/// square `R = (alpha_0, alpha_2)^2` contains the immediate basin of the
/// middle one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootTriple {
    /// Index of `alpha_1` in the system's root list.
    pub middle: usize,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// The inflection point in `(alpha_0, alpha_2)` when it is unique.
    pub inflection: Option<f64>,
}

impl RootTriple {
    pub fn region(&self) -> crate::geometry::Rect {
        crate::geometry::Rect::square(self.alpha0, self.alpha2)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.region().contains_open(p)
    }

    pub fn has_single_inflection(&self) -> bool {
        self.inflection.is_some()
    }
}

/// A polynomial together with its simple real roots and the numeric
/// thresholds used by the dynamics.
#[derive(Debug, Clone)]
pub struct SecantSystem {
    poly: Polynomial,
    dpoly: Polynomial,
    ddpoly: Polynomial,
    roots: RootSet,
    sing_tol: f64,
    escape_bound: f64,
}

impl SecantSystem {
    pub fn new(poly: Polynomial) -> Result<Self, MapError> {
        if poly.degree() > MAX_DEGREE {
            return Err(PolyError::DegreeTooHigh(poly.degree()).into());
        }
        let roots = poly.real_roots()?;
        let max_root = roots.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        let dpoly = poly.derivative();
        let ddpoly = dpoly.derivative();
        Ok(SecantSystem {
            poly,
            dpoly,
            ddpoly,
            roots,
            sing_tol: DEFAULT_SING_TOL,
            escape_bound: 1e9 * (1.0 + max_root),
        })
    }

    pub fn with_sing_tol(mut self, sing_tol: f64) -> Result<Self, MapError> {
        if !(sing_tol > 0.0) || !sing_tol.is_finite() {
            return Err(MapError::InvalidParameter(format!("sing_tol = {sing_tol}")));
        }
        self.sing_tol = sing_tol;
        Ok(self)
    }

    pub fn with_escape_bound(mut self, bound: f64) -> Result<Self, MapError> {
        let max_root = self.roots.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        if !(bound > max_root) {
            return Err(MapError::InvalidParameter(format!(
                "escape bound {bound} must exceed max |root| = {max_root}"
            )));
        }
        self.escape_bound = bound;
        Ok(self)
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn sing_tol(&self) -> f64 {
        self.sing_tol
    }

    pub fn escape_bound(&self) -> f64 {
        self.escape_bound
    }

    pub fn p(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    pub fn dp(&self, x: f64) -> f64 {
        self.dpoly.eval(x)
    }

    pub fn ddp(&self, x: f64) -> f64 {
        self.ddpoly.eval(x)
    }

    pub fn q(&self, x: f64, y: f64) -> f64 {
        self.poly.q_eval(x, y)
    }

    fn is_singular(&self, q: f64, py: f64) -> bool {
        !(q.abs() >= self.sing_tol * (1.0 + py.abs()))
    }

    /// One application of the secant map.
    pub fn step(&self, pt: Point) -> Result<Point, MapError> {
        let py = self.poly.eval(pt.y);
        let q = self.poly.q_eval(pt.x, pt.y);
        if self.is_singular(q, py) {
            return Err(MapError::Singular(pt));
        }
        Ok(Point::new(pt.y, pt.y - py / q))
    }

    /// Index of the root `alpha` with `max(|x - alpha|, |y - alpha|) <= tol`.
    pub fn converged_root(&self, pt: Point, tol: f64) -> Option<usize> {
        let roots = self.roots.roots();
        if roots.is_empty() {
            return None;
        }
        let k = roots.partition_point(|&r| r < pt.y);
        let candidates = [k.checked_sub(1), (k < roots.len()).then_some(k)];
        candidates.into_iter().flatten().find(|&i| {
            let a = roots[i];
            (pt.x - a).abs() <= tol && (pt.y - a).abs() <= tol
        })
    }

    pub fn orbit(&self, seed: Point, params: &OrbitParams) -> OrbitResult {
        self.orbit_impl(seed, params, |_| {})
    }

    /// Like [`orbit`](Self::orbit) but also returns every visited point,
    /// starting with the seed.
    pub fn orbit_trace(&self, seed: Point, params: &OrbitParams) -> (OrbitResult, Vec<Point>) {
        let mut trace = Vec::new();
        let res = self.orbit_impl(seed, params, |p| trace.push(p));
        (res, trace)
    }

    fn orbit_impl(
        &self,
        seed: Point,
        params: &OrbitParams,
        mut visit: impl FnMut(Point),
    ) -> OrbitResult {
        let mut pt = seed;
        let mut it = 0;
        loop {
            visit(pt);
            if let Some(i) = self.converged_root(pt, params.tol) {
                return OrbitResult {
                    outcome: OrbitOutcome::Converged(i),
                    iterations: it,
                    last: pt,
                };
            }
            if it >= params.max_iter
                || !pt.is_finite()
                || pt.x.abs() > self.escape_bound
                || pt.y.abs() > self.escape_bound
            {
                return OrbitResult {
                    outcome: OrbitOutcome::NonConverged,
                    iterations: it,
                    last: pt,
                };
            }
            it += 1;
            match self.step(pt) {
                Ok(next) => pt = next,
                Err(_) => {
                    return OrbitResult {
                        outcome: OrbitOutcome::Singular,
                        iterations: it,
                        last: pt,
                    }
                }
            }
        }
    }

    /// `N_p(x) = x - p(x) / p'(x)`, the restriction of `S` to the diagonal.
    pub fn newton_map(&self, x: f64) -> Result<f64, MapError> {
        let (v, d) = self.poly.eval_with_derivative(x);
        if self.is_singular(d, v) {
            return Err(MapError::CriticalPoint(x));
        }
        Ok(x - v / d)
    }

    /// `N_p'(x) = p(x) p''(x) / p'(x)^2`.
    pub fn newton_map_derivative(&self, x: f64) -> Result<f64, MapError> {
        let (v, d) = self.poly.eval_with_derivative(x);
        if self.is_singular(d, v) {
            return Err(MapError::CriticalPoint(x));
        }
        Ok(v * self.ddpoly.eval(x) / (d * d))
    }

    /// The consecutive roots around root `middle`.
    pub fn triple(&self, middle: usize) -> Result<RootTriple, MapError> {
        if !self.roots.internal_indices().contains(&middle) {
            return Err(MapError::NotInternal(middle));
        }
        let r = self.roots.roots();
        let (a0, a1, a2) = (r[middle - 1], r[middle], r[middle + 1]);
        let cs = self.poly.critical_and_inflection_points(a0, a2)?;
        Ok(RootTriple {
            middle,
            alpha0: a0,
            alpha1: a1,
            alpha2: a2,
            inflection: cs.single_inflection(),
        })
    }
}
