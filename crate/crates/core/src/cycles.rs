//! Period-4 cycles of the secant map: cross ratio, ordering types, search,
//! construction of cubics with a prescribed cycle, and stability.
//!
//! A 4-cycle `(a,b) -> (b,c) -> (c,d) -> (d,a)` is written with `a` the
//! smallest of the four values. Its type is read off the relative order of
//! `b`, `c`, `d`:
//!
//! | type | ordering        | cross ratio    |
//! |------|-----------------|----------------|
//! | I    | `a < b < d < c` | `(sqrt5-1)/2`  |
//! | II   | `a < c < d < b` | `(sqrt5-1)/2`  |
//! | III  | `a < d < b < c` | `-(1+sqrt5)/2` |
//! | IV   | `a < c < b < d` | `-(1+sqrt5)/2` |
//!
//! The orderings `a < b < c < d` and `a < d < c < b` carry no 4-cycles.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::linalg::{solve_dense, Eigenvalues, Mat2};
use crate::polynomial::{newton_interpolate, NewtonInterpolant, PolyError, Polynomial};
use crate::secant_map::{MapError, SecantSystem};

/// `(sqrt(5) - 1) / 2`.
pub const LAMBDA_POSITIVE: f64 = 0.618_033_988_749_894_8;
/// `-(1 + sqrt(5)) / 2`.
pub const LAMBDA_NEGATIVE: f64 = -1.618_033_988_749_895;

/// Closure residual accepted for a verified cycle.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("degenerate quadruple {0:?}: cross ratio undefined")]
    DegenerateQuadruple([f64; 4]),
    #[error("ordering {0} admits no 4-cycle")]
    Incompatible(String),
    #[error("sign pattern {signs:?} of p does not match type {cycle_type}")]
    SignPatternMismatch { cycle_type: CycleType, signs: [i8; 4] },
    #[error("ordering violation: {0}")]
    OrderingViolation(String),
    #[error("constructed cycle does not close: residual {0:e}")]
    VerificationFailed(f64),
    #[error("values are not pairwise distinct: {0:?}")]
    RepeatedEntries([f64; 4]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CycleType {
    I,
    II,
    III,
    IV,
}

impl CycleType {
    pub const ALL: [CycleType; 4] = [CycleType::I, CycleType::II, CycleType::III, CycleType::IV];

    /// The cross ratio every cycle of this type carries.
    pub fn lambda(self) -> f64 {
        match self {
            CycleType::I | CycleType::II => LAMBDA_POSITIVE,
            CycleType::III | CycleType::IV => LAMBDA_NEGATIVE,
        }
    }

    /// Letters of `a, b, c, d` in increasing order of value.
    pub fn ordering(self) -> [char; 4] {
        match self {
            CycleType::I => ['a', 'b', 'd', 'c'],
            CycleType::II => ['a', 'c', 'd', 'b'],
            CycleType::III => ['a', 'd', 'b', 'c'],
            CycleType::IV => ['a', 'c', 'b', 'd'],
        }
    }

    /// Signs of `(p(a), p(b), p(c), p(d))` relative to `p(a)`.
    pub fn sign_pattern(self) -> [i8; 4] {
        match self {
            CycleType::I => [1, 1, -1, -1],
            CycleType::II => [1, -1, 1, 1],
            CycleType::III => [1, 1, 1, 1],
            CycleType::IV => [1, -1, -1, -1],
        }
    }

    /// The letter solved for in [`construct_polynomial`]; the other three
    /// take the base values.
    fn solved_letter(self) -> char {
        match self {
            CycleType::IV => 'b',
            _ => 'd',
        }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CycleType::I => "I",
            CycleType::II => "II",
            CycleType::III => "III",
            CycleType::IV => "IV",
        };
        f.write_str(s)
    }
}

impl FromStr for CycleType {
    type Err = CycleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(CycleType::I),
            "II" | "2" => Ok(CycleType::II),
            "III" | "3" => Ok(CycleType::III),
            "IV" | "4" => Ok(CycleType::IV),
            _ => Err(CycleError::InvalidParameter(format!("unknown cycle type {s:?}"))),
        }
    }
}

/// `lambda(a,b;c,d) = ((c-a)(d-b)) / ((c-b)(d-a))`.
pub fn cross_ratio(a: f64, b: f64, c: f64, d: f64) -> Result<f64, CycleError> {
    let den = (c - b) * (d - a);
    if den == 0.0 || !den.is_finite() {
        return Err(CycleError::DegenerateQuadruple([a, b, c, d]));
    }
    Ok((c - a) * (d - b) / den)
}

/// Rotates `(a,b,c,d)` cyclically so the smallest value comes first.
pub fn canonicalize(v: [f64; 4]) -> [f64; 4] {
    let k = (0..4).min_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap_or(0);
    [v[k], v[(k + 1) % 4], v[(k + 2) % 4], v[(k + 3) % 4]]
}

fn ordering_of(v: [f64; 4]) -> [char; 4] {
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    idx.map(|i| (b'a' + i as u8) as char)
}

/// Type from the ordering alone. `v` must be canonical with distinct entries.
pub fn classify_ordering(v: [f64; 4]) -> Result<CycleType, CycleError> {
    if !distinct(&v) {
        return Err(CycleError::RepeatedEntries(v));
    }
    if canonicalize(v) != v {
        return Err(CycleError::OrderingViolation(format!(
            "{v:?} does not start with its minimum"
        )));
    }
    let ord = ordering_of(v);
    CycleType::ALL
        .into_iter()
        .find(|t| t.ordering() == ord)
        .ok_or_else(|| CycleError::Incompatible(ord.iter().collect()))
}

/// Type from the ordering, cross-checked against the signs of `p` at the
/// four values.
pub fn classify(v: [f64; 4], pv: [f64; 4]) -> Result<CycleType, CycleError> {
    let t = classify_ordering(v)?;
    let s0 = pv[0].signum();
    let signs = pv.map(|x| (x.signum() * s0) as i8);
    if signs != t.sign_pattern() {
        return Err(CycleError::SignPatternMismatch {
            cycle_type: t,
            signs,
        });
    }
    Ok(t)
}

fn distinct(v: &[f64]) -> bool {
    let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if (v[i] - v[j]).abs() <= 1e-9 * scale {
                return false;
            }
        }
    }
    true
}

/// Sign behaviour of `y - x` along the four orbit points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPattern {
    /// Two consecutive points on each side of the diagonal.
    Turning,
    /// Sides of the diagonal alternate at every step.
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourCycle {
    /// `[a, b, c, d]`, with `a` the minimum.
    pub points: [f64; 4],
    pub lambda: f64,
    pub cycle_type: CycleType,
    pub multipliers: Eigenvalues,
    pub residual: f64,
}

impl FourCycle {
    /// `(a,b), (b,c), (c,d), (d,a)`.
    pub fn orbit_points(&self) -> [Point; 4] {
        let v = self.points;
        [0, 1, 2, 3].map(|k| Point::new(v[k], v[(k + 1) % 4]))
    }

    pub fn diagonal_pattern(&self) -> DiagonalPattern {
        let s = self.orbit_points().map(|p| (p.y - p.x).signum());
        let changes = (0..4).filter(|&k| s[k] != s[(k + 1) % 4]).count();
        if changes == 4 {
            DiagonalPattern::Alternating
        } else {
            DiagonalPattern::Turning
        }
    }

    pub fn report(&self) -> CycleReport {
        CycleReport {
            points: self.orbit_points().map(|p| [p.x, p.y]),
            lambda: self.lambda,
            cycle_type: self.cycle_type,
            multipliers: self.multipliers,
            residual: self.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub points: [[f64; 2]; 4],
    pub lambda: f64,
    #[serde(rename = "type")]
    pub cycle_type: CycleType,
    pub multipliers: Eigenvalues,
    pub residual: f64,
}

/// `max_k |S^n(P_k) - P_k|` over the orbit points `P_k = (v_k, v_{k+1})`.
pub fn closure_residual(sys: &SecantSystem, v: &[f64]) -> Result<f64, MapError> {
    let n = v.len();
    let mut worst = 0.0_f64;
    for k in 0..n {
        let start = Point::new(v[k], v[(k + 1) % n]);
        let mut p = start;
        for _ in 0..n {
            p = sys.step(p)?;
        }
        worst = worst.max(p.max_dist(&start));
    }
    Ok(worst)
}

/// Checks that `v` is a 4-cycle of `sys` and assembles its description.
/// The cross ratio is reported, not enforced.
pub fn verify_cycle(sys: &SecantSystem, v: [f64; 4]) -> Result<FourCycle, CycleError> {
    let v = canonicalize(v);
    if !distinct(&v) {
        return Err(CycleError::RepeatedEntries(v));
    }
    let residual = closure_residual(sys, &v)?;
    if !(residual <= CLOSURE_TOL) {
        return Err(CycleError::VerificationFailed(residual));
    }
    let cycle_type = classify(v, v.map(|x| sys.p(x)))?;
    let lambda = cross_ratio(v[0], v[1], v[2], v[3])?;
    let multipliers = sys
        .jacobian_along_orbit(Point::new(v[0], v[1]), 4)?
        .eigenvalues();
    Ok(FourCycle {
        points: v,
        lambda,
        cycle_type,
        multipliers,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// Seeds per axis.
    pub grid_density: usize,
    /// Newton stops once the step is below `newton_tol * (1 + |x|)`.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    pub dedup_tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            grid_density: 24,
            newton_tol: 1e-14,
            max_newton_iter: 80,
            dedup_tol: 1e-7,
        }
    }
}

/// A Newton solution that closes under `S^4` but fails classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anomaly {
    pub points: [f64; 4],
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleSearch {
    pub cycles: Vec<FourCycle>,
    pub anomalies: Vec<Anomaly>,
}

/// Cleared residual `G_i = p(x_{i+1})(x_{i+2} - x_i) - p(x_i)(x_{i+2} - x_{i+1})`,
/// indices mod `n`; it vanishes exactly when `S(x_i, x_{i+1}) = (x_{i+1}, x_{i+2})`
/// away from the singular set.
fn residual_and_jacobian(poly: &Polynomial, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let pd: Vec<(f64, f64)> = x.iter().map(|&v| poly.eval_with_derivative(v)).collect();
    let mut g = vec![0.0; n];
    let mut j = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (i1, i2) = ((i + 1) % n, (i + 2) % n);
        let (p0, d0) = pd[i];
        let (p1, d1) = pd[i1];
        g[i] = p1 * (x[i2] - x[i]) - p0 * (x[i2] - x[i1]);
        j[i][i] += -p1 - d0 * (x[i2] - x[i1]);
        j[i][i1] += d1 * (x[i2] - x[i]) + p0;
        j[i][i2] += p1 - p0;
    }
    (g, j)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn damped_newton(poly: &Polynomial, mut x: Vec<f64>, params: &SearchParams) -> Option<Vec<f64>> {
    let (mut g, mut jac) = residual_and_jacobian(poly, &x);
    let mut gn = max_abs(&g);
    for _ in 0..params.max_newton_iter {
        if gn == 0.0 {
            return Some(x);
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let dx = solve_dense(jac, rhs)?;
        if !dx.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let (tg, tj) = residual_and_jacobian(poly, &trial);
            let tn = max_abs(&tg);
            if tn < gn || (tn <= gn && t < 1.0) {
                accepted = Some((trial, tg, tj, tn));
                break;
            }
            t *= 0.5;
        }
        let step = t * max_abs(&dx);
        let Some((nx, ng, nj, nn)) = accepted else {
            // No decrease possible: accept if we are already at the noise floor.
            return (max_abs(&dx) <= 1e-10 * (1.0 + max_abs(&x))).then_some(x);
        };
        let scale = 1.0 + max_abs(&nx);
        x = nx;
        g = ng;
        jac = nj;
        gn = nn;
        if step <= params.newton_tol * scale {
            return Some(x);
        }
    }
    None
}

fn value_range(rect: &Rect) -> Option<(f64, f64)> {
    let lo = rect.x_min.max(rect.y_min);
    let hi = rect.x_max.min(rect.y_max);
    (lo < hi).then_some((lo, hi))
}

fn rotate_min_first(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let k = (0..n).min_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap_or(0);
    (0..n).map(|i| v[(k + i) % n]).collect()
}

/// Periodic orbits of `S` of (not necessarily minimal) period `period`,
/// found by damped Newton on the cleared residual from a grid of seeds
/// with a strictly smallest first entry. Each returned orbit closes under
/// `S^period` within [`CLOSURE_TOL`], has every orbit point inside `rect`,
/// and is rotated so its minimum comes first.
pub fn find_periodic_orbits(
    sys: &SecantSystem,
    rect: &Rect,
    period: usize,
    params: &SearchParams,
) -> Vec<Vec<f64>> {
    let Some((lo, hi)) = value_range(rect) else {
        return Vec::new();
    };
    if period == 0 || params.grid_density == 0 {
        return Vec::new();
    }
    let g = params.grid_density;
    let h = (hi - lo) / g as f64;
    let node = |k: usize| lo + h * (k as f64 + 0.5);

    // Seeds: index tuples whose first index is the strict minimum.
    let first: Vec<usize> = (0..g).collect();
    let found: Vec<Vec<f64>> = first
        .par_iter()
        .flat_map_iter(|&i0| {
            let rest = period - 1;
            let span = g - i0 - 1;
            let count = span.checked_pow(rest as u32).unwrap_or(0);
            (0..count).filter_map(move |mut code| {
                let mut seed = vec![node(i0)];
                for _ in 0..rest {
                    seed.push(node(i0 + 1 + code % span));
                    code /= span;
                }
                let x = damped_newton(sys.poly(), seed, params)?;
                let inside = x.iter().all(|&v| v > lo - 1e-12 && v < hi + 1e-12);
                if !inside {
                    return None;
                }
                let res = closure_residual(sys, &x).ok()?;
                (res <= CLOSURE_TOL).then(|| rotate_min_first(&x))
            })
        })
        .collect();

    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in found {
        let dup = out.iter().any(|o| {
            o.iter()
                .zip(&x)
                .all(|(a, b)| (a - b).abs() <= params.dedup_tol)
        });
        if !dup {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Minimal-period-4 cycles in `rect`. Orbits that close but fail
/// classification are returned as anomalies rather than dropped.
pub fn find_four_cycles(sys: &SecantSystem, rect: &Rect, params: &SearchParams) -> CycleSearch {
    let mut cycles = Vec::new();
    let mut anomalies = Vec::new();
    for x in find_periodic_orbits(sys, rect, 4, params) {
        let v = [x[0], x[1], x[2], x[3]];
        if !distinct(&v) {
            continue;
        }
        match verify_cycle(sys, v) {
            Ok(c) => cycles.push(c),
            Err(e) => anomalies.push(Anomaly {
                points: v,
                reason: e.to_string(),
            }),
        }
    }
    CycleSearch { cycles, anomalies }
}

/// Result of [`construct_polynomial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub cycle_type: CycleType,
    /// `[a, b, c, d]`.
    pub points: [f64; 4],
    /// `[p(a), p(b), p(c), p(d)]`.
    pub values: [f64; 4],
    /// The value solved from the cross-ratio equation.
    pub solved: f64,
    /// Newton form on the three base values followed by the solved one.
    pub newton: NewtonInterpolant,
    pub polynomial: Polynomial,
    pub cycle: FourCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    #[serde(rename = "type")]
    pub cycle_type: CycleType,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p_values: [f64; 4],
    pub newton_nodes: Vec<f64>,
    pub newton_coefficients: Vec<f64>,
    pub monomial_coefficients: Vec<f64>,
    pub cycle: CycleReport,
}

impl Construction {
    pub fn report(&self) -> ConstructionReport {
        let [a, b, c, d] = self.points;
        ConstructionReport {
            cycle_type: self.cycle_type,
            a,
            b,
            c,
            d,
            p_values: self.values,
            newton_nodes: self.newton.nodes().to_vec(),
            newton_coefficients: self.newton.coefficients().to_vec(),
            monomial_coefficients: self.polynomial.coeffs().to_vec(),
            cycle: self.cycle.report(),
        }
    }
}

/// Default scale `p(d)` for each type, matching the sign conventions of the
/// standard examples.
pub fn default_scale(t: CycleType) -> f64 {
    match t {
        CycleType::I | CycleType::IV => -1.0,
        CycleType::II | CycleType::III => 1.0,
    }
}

/// Builds a cubic whose secant map has a 4-cycle of type `t`.
///
/// The three increasing `base` values fill the letters of `t`'s ordering
/// other than the solved one (`d`, or `b` for type IV); the solved letter
/// comes from the cross-ratio equation. The ratio equations then fix
/// `p(a), p(b), p(c)` from `p(d) = scale`, and the cubic is their Newton
/// interpolant.
pub fn construct_polynomial(
    t: CycleType,
    base: [f64; 3],
    scale: f64,
) -> Result<Construction, CycleError> {
    if !base.iter().all(|v| v.is_finite()) || !(base[0] < base[1] && base[1] < base[2]) {
        return Err(CycleError::OrderingViolation(format!(
            "base {base:?} must be finite and strictly increasing"
        )));
    }
    if !(scale.is_finite() && scale != 0.0) {
        return Err(CycleError::InvalidParameter(format!(
            "scale must be finite and nonzero, got {scale}"
        )));
    }
    let solved = t.solved_letter();
    let mut pts = [f64::NAN; 4];
    let mut it = base.iter();
    for ch in t.ordering() {
        if ch != solved {
            pts[(ch as u8 - b'a') as usize] = *it.next().unwrap();
        }
    }
    let lam = t.lambda();
    let [a, b, c, d] = pts;
    let x = match solved {
        'd' => (lam * (c - b) * a - (c - a) * b) / (lam * (c - b) - (c - a)),
        _ => ((c - a) * d - lam * (d - a) * c) / ((c - a) - lam * (d - a)),
    };
    if !x.is_finite() {
        return Err(CycleError::OrderingViolation(
            "cross-ratio equation has no finite solution".into(),
        ));
    }
    pts[(solved as u8 - b'a') as usize] = x;
    let [a, b, c, d] = pts;
    if ordering_of(pts) != t.ordering() || !distinct(&pts) {
        return Err(CycleError::OrderingViolation(format!(
            "solved value {x} breaks the type {t} ordering"
        )));
    }

    let pd = scale;
    let pc = pd * (a - c) / (a - d);
    let pb = pc * (d - b) / (d - c);
    let pa = pb * (c - a) / (c - b);
    let values = [pa, pb, pc, pd];

    let mut nodes: Vec<f64> = base.to_vec();
    nodes.push(x);
    let node_values: Vec<f64> = nodes
        .iter()
        .map(|n| values[pts.iter().position(|p| p == n).unwrap()])
        .collect();
    let newton = newton_interpolate(&nodes, &node_values)?;
    let polynomial = newton.to_polynomial();
    let sys = SecantSystem::new(polynomial.clone())?;
    let cycle = verify_cycle(&sys, pts)?;
    Ok(Construction {
        cycle_type: t,
        points: pts,
        values,
        solved: x,
        newton,
        polynomial,
        cycle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityLabel {
    Saddle,
    Attractor,
    Repeller,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub matrix: Mat2,
    pub eigenvalues: Eigenvalues,
    /// Unit eigenvectors matching the real eigenvalues, in the same order.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub label: StabilityLabel,
}

/// Multipliers of `D(S^4)` at `(a, b)`.
pub fn stability(sys: &SecantSystem, cycle: &FourCycle) -> Result<Stability, CycleError> {
    let [a, b, _, _] = cycle.points;
    let m = sys.jacobian_along_orbit(Point::new(a, b), 4)?;
    let ev = m.eigenvalues();
    let eigenvectors = match ev {
        Eigenvalues::Real { first, second } => Some([m.eigenvector(first), m.eigenvector(second)]),
        Eigenvalues::Complex { .. } => None,
    };
    let unstable = ev.magnitudes().iter().filter(|&&v| v > 1.0).count();
    let label = match unstable {
        0 => StabilityLabel::Attractor,
        1 => StabilityLabel::Saddle,
        _ => StabilityLabel::Repeller,
    };
    Ok(Stability {
        matrix: m,
        eigenvalues: ev,
        eigenvectors,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P_I_POINTS: [f64; 4] = [1.0, 2.0, 3.0, 2.447213595];

    fn p_type_i() -> SecantSystem {
        let ni = NewtonInterpolant::from_parts(
            vec![1.0, 2.0, 3.0, 2.447213595],
            vec![2.23606798, -1.11803390, -0.6909830, 3.27254249],
        )
        .unwrap();
        SecantSystem::new(ni.to_polynomial()).unwrap()
    }

    #[test]
    fn golden_constants() {
        let s5 = 5.0_f64.sqrt();
        assert!((LAMBDA_POSITIVE - (s5 - 1.0) / 2.0).abs() < 1e-15);
        assert!((LAMBDA_NEGATIVE + (1.0 + s5) / 2.0).abs() < 1e-15);
        for l in [LAMBDA_POSITIVE, LAMBDA_NEGATIVE] {
            assert!((l * l / (1.0 - l) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_ratio_of_the_type_i_cycle() {
        let [a, b, c, d] = P_I_POINTS;
        let l = cross_ratio(a, b, c, d).unwrap();
        assert!((l - 0.6180339887).abs() < 1e-8);
        assert!(matches!(
            cross_ratio(1.0, 2.0, 2.0, 3.0),
            Err(CycleError::DegenerateQuadruple(_))
        ));
    }

    proptest! {
        #[test]
        fn cross_ratio_identities(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64) {
            prop_assume!(distinct(&[a, b, c, d]));
            prop_assume!((c - b).abs() > 1e-3 && (d - a).abs() > 1e-3 && (b - a).abs() > 1e-3 && (d - c).abs() > 1e-3);
            let l = cross_ratio(a, b, c, d).unwrap();
            prop_assume!((l - 1.0).abs() > 1e-3);
            let swapped = cross_ratio(a, d, c, b).unwrap();
            let want = l / (l - 1.0);
            prop_assert!((swapped - want).abs() <= 1e-10 * want.abs().max(1.0));
            let reversed = cross_ratio(d, c, b, a).unwrap();
            prop_assert!((reversed - l).abs() <= 1e-10 * l.abs().max(1.0));
        }
    }

    #[test]
    fn ordering_exhaustiveness() {
        // All six orderings of b, c, d above a fixed minimum.
        let perms = [
            [1.0, 2.0, 3.0],
            [1.0, 3.0, 2.0],
            [2.0, 1.0, 3.0],
            [2.0, 3.0, 1.0],
            [3.0, 1.0, 2.0],
            [3.0, 2.0, 1.0],
        ];
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        for [b, c, d] in perms {
            match classify_ordering([0.0, b, c, d]) {
                Ok(t) => accepted.push(t),
                Err(CycleError::Incompatible(o)) => rejected.push(o),
                Err(e) => panic!("{e}"),
            }
        }
        accepted.sort_by_key(|t| *t as u8);
        assert_eq!(accepted, CycleType::ALL.to_vec());
        rejected.sort();
        assert_eq!(rejected, vec!["abcd".to_string(), "adcb".to_string()]);
    }

    #[test]
    fn sign_patterns_follow_from_the_ratio_equations() {
        // p(a)/p(b) = (c-a)/(c-b), p(b)/p(c) = (d-b)/(d-c), p(c)/p(d) = (a-c)/(a-d).
        for t in CycleType::ALL {
            let mut v = [0.0; 4];
            for (rank, ch) in t.ordering().iter().enumerate() {
                v[(*ch as u8 - b'a') as usize] = rank as f64;
            }
            let [a, b, c, d] = v;
            let sb = ((c - a) / (c - b)).signum();
            let sc = sb * ((d - b) / (d - c)).signum();
            let sd = sc * ((a - d) / (a - c)).signum();
            assert_eq!([1, sb as i8, sc as i8, sd as i8], t.sign_pattern(), "{t}");
        }
    }

    #[test]
    fn classify_checks_signs() {
        let pv = [2.23606798, 1.118033989, -1.381966011, -1.0];
        assert_eq!(classify(P_I_POINTS, pv), Ok(CycleType::I));
        let bad = [pv[0], pv[1], -pv[2], pv[3]];
        assert!(matches!(
            classify(P_I_POINTS, bad),
            Err(CycleError::SignPatternMismatch { .. })
        ));
        assert!(matches!(
            classify([1.0, 2.0, 3.0, 4.0], [1.0; 4]),
            Err(CycleError::Incompatible(_))
        ));
    }

    #[test]
    fn canonical_rotation() {
        assert_eq!(canonicalize([3.0, 2.4, 1.0, 2.0]), [1.0, 2.0, 3.0, 2.4]);
    }

    #[test]
    fn type_i_construction() {
        let c = construct_polynomial(CycleType::I, [1.0, 2.0, 3.0], -1.0).unwrap();
        assert!((c.solved - 2.447213595).abs() < 1e-8);
        let want_p = [2.23606798, 1.118033989, -1.381966011, -1.0];
        for (got, want) in c.values.iter().zip(want_p) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        let want_n = [2.23606798, -1.11803390, -0.6909830, 3.27254249];
        for (got, want) in c.newton.coefficients().iter().zip(want_n) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(c.cycle.residual <= CLOSURE_TOL);
        assert_eq!(c.cycle.cycle_type, CycleType::I);
    }

    #[test]
    fn every_type_can_be_constructed() {
        for t in CycleType::ALL {
            let c = construct_polynomial(t, [1.0, 2.0, 3.0], default_scale(t)).unwrap();
            assert_eq!(c.cycle.cycle_type, t);
            assert!((c.cycle.lambda - t.lambda()).abs() < 1e-12);
            assert!(c.cycle.residual <= CLOSURE_TOL);
            // Flipping the scale flips p and keeps the cycle.
            let neg = construct_polynomial(t, [1.0, 2.0, 3.0], -default_scale(t)).unwrap();
            assert_eq!(neg.cycle.points, c.cycle.points);
        }
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            construct_polynomial(CycleType::I, [1.0, 3.0, 2.0], -1.0),
            Err(CycleError::OrderingViolation(_))
        ));
        assert!(matches!(
            construct_polynomial(CycleType::I, [1.0, 2.0, 3.0], 0.0),
            Err(CycleError::InvalidParameter(_))
        ));
    }

    #[test]
    fn stability_of_the_type_i_cycle() {
        // The listed coefficients are rounded, so the exact cycle of the
        // rounded cubic sits ~1e-8 away from the listed points.
        let sys = p_type_i();
        let res = find_four_cycles(&sys, &Rect::square(0.5, 3.5), &SearchParams::default());
        let cyc = res
            .cycles
            .into_iter()
            .find(|c| (c.points[1] - 2.0).abs() < 1e-6)
            .unwrap();
        let st = stability(&sys, &cyc).unwrap();
        assert_eq!(st.label, StabilityLabel::Saddle);
        let Eigenvalues::Real { first, second } = st.eigenvalues else {
            panic!("complex multipliers");
        };
        assert!((first - 483.55).abs() / 483.55 < 0.01);
        assert!((second - 0.05).abs() / 0.05 < 0.1);
        assert!((first * second - st.matrix.det()).abs() <= 1e-8 * st.matrix.det().abs());
        let vecs = st.eigenvectors.unwrap();
        for (v, want) in vecs.iter().zip([[-0.65, -0.76], [-0.75, 0.66]]) {
            let sgn = if v[0] * want[0] + v[1] * want[1] < 0.0 { -1.0 } else { 1.0 };
            for k in 0..2 {
                assert!((sgn * v[k] - want[k]).abs() < 0.02, "{v:?}");
            }
        }
    }

    #[test]
    fn finder_recovers_the_type_i_cycle() {
        let sys = p_type_i();
        let res = find_four_cycles(&sys, &Rect::square(0.5, 3.5), &SearchParams::default());
        assert!(res.anomalies.is_empty(), "{:?}", res.anomalies);
        assert!(res.cycles.iter().any(|c| c
            .points
            .iter()
            .zip(P_I_POINTS)
            .all(|(a, b)| (a - b).abs() < 1e-6)));
        for c in &res.cycles {
            assert!((c.lambda * c.lambda / (1.0 - c.lambda) - 1.0).abs() <= 1e-8);
            assert!(c.residual <= CLOSURE_TOL);
        }
    }

    #[test]
    fn diagonal_patterns() {
        let cyc = construct_polynomial(CycleType::I, [1.0, 2.0, 3.0], -1.0).unwrap().cycle;
        assert_eq!(cyc.diagonal_pattern(), DiagonalPattern::Turning);
        let c4 = construct_polynomial(CycleType::IV, [1.0, 2.0, 3.0], -1.0).unwrap();
        assert_eq!(c4.cycle.diagonal_pattern(), DiagonalPattern::Alternating);
    }

    #[test]
    fn type_names_round_trip() {
        for t in CycleType::ALL {
            assert_eq!(t.to_string().parse::<CycleType>().unwrap(), t);
        }
        assert!("V".parse::<CycleType>().is_err());
    }
}
