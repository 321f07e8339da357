//! Real univariate polynomials, real-root isolation, Newton interpolation and
//! the divided-difference polynomial `q(x, y) = (p(x) - p(y)) / (x - y)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest degree accepted by the parser and by [`crate::SecantSystem`].
pub const MAX_DEGREE: usize = 64;

const BISECTION_WIDTH: f64 = 1e-13;
const MULTIPLE_ROOT_TOL: f64 = 1e-8;
/// Absolute residual accepted at a stored root. Polynomials with large
/// coefficients are allowed the floating-point evaluation error instead.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial is constant; it has no isolated real roots")]
    DegreeZero,
    #[error("multiple root detected near {root} (|p'| = {derivative:e})")]
    MultipleRootDetected { root: f64, derivative: f64 },
    #[error("interpolation nodes are not pairwise distinct (node {0})")]
    DuplicateNodes(f64),
    #[error("{nodes} nodes but {values} values")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("degree {0} exceeds the supported maximum of {MAX_DEGREE}")]
    DegreeTooHigh(usize),
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// A real polynomial `a_0 + a_1 x + ... + a_k x^k`, stored in ascending order
/// with trailing zero coefficients trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    /// The Chebyshev polynomial of the first kind `T_k`, built with the
    /// three-term recurrence `T_{k+1} = 2x T_k - T_{k-1}`.
    pub fn chebyshev(k: usize) -> Self {
        let mut prev = vec![1.0];
        if k == 0 {
            return Polynomial::new(prev);
        }
        let mut cur = vec![0.0, 1.0];
        for _ in 1..k {
            let mut next = vec![0.0; cur.len() + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = cur;
            cur = next;
        }
        Polynomial::new(cur)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading_coefficient(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Largest coefficient magnitude.
    pub fn coefficient_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Returns `(p(x), p'(x))` in a single Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for &c in self.coeffs.iter().rev() {
            slope = slope * x + value;
            value = value * x + c;
        }
        (value, slope)
    }

    /// `sum |a_k| |x|^k`, the magnitude that bounds rounding error in `eval`.
    pub fn eval_magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Polynomial {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// Multiplies by `(x - r)`.
    pub fn mul_linear(&self, r: f64) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] += c;
            out[k] -= r * c;
        }
        Polynomial::new(out)
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Polynomial::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) + get(&other.coeffs, i))
                .collect(),
        )
    }

    /// Quotient of `p(x) - p(y)` by `x - y`, as a polynomial in `x` for fixed
    /// `y` (synthetic division of `p` by `x - y`).
    pub fn q_in_x(&self, y: f64) -> Polynomial {
        let n = self.degree();
        if n == 0 {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; n];
        out[n - 1] = self.coeffs[n];
        for i in (0..n - 1).rev() {
            out[i] = self.coeffs[i + 1] + y * out[i + 1];
        }
        Polynomial::new(out)
    }

    /// Coefficients of `q` as a bivariate polynomial: entry `[i][j]` is the
    /// coefficient of `x^i y^j`, which is `a_{i+j+1}`.
    pub fn q_coefficients(&self) -> Vec<Vec<f64>> {
        let n = self.degree();
        (0..n)
            .map(|i| (0..n - i).map(|j| self.coeffs[i + j + 1]).collect())
            .collect()
    }

    /// `q(x, y) = sum_k a_k sum_{i+j=k-1} x^i y^j`.
    ///
    /// Evaluated by a Clenshaw recurrence in `s = x + y`, `t = x y`, so the
    /// result is bit-for-bit symmetric in its arguments and exact on the
    /// diagonal, where `q(x, x) = p'(x)`.
    pub fn q_eval(&self, x: f64, y: f64) -> f64 {
        let s = x + y;
        let t = x * y;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &a in self.coeffs.iter().skip(1).rev() {
            let b0 = a + s * b1 - t * b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }

    /// Returns `(q, dq/dx)` at `(x, y)`.
    pub fn q_with_dx(&self, x: f64, y: f64) -> (f64, f64) {
        let s = x + y;
        let t = x * y;
        // d/dx of s and t
        let ds = 1.0;
        let dt = y;
        let (mut b1, mut b2) = (0.0, 0.0);
        let (mut d1, mut d2) = (0.0, 0.0);
        for &a in self.coeffs.iter().skip(1).rev() {
            let b0 = a + s * b1 - t * b2;
            let d0 = ds * b1 + s * d1 - dt * b2 - t * d2;
            b2 = b1;
            b1 = b0;
            d2 = d1;
            d1 = d0;
        }
        (b1, d1)
    }

    /// Partial derivative of `q` with respect to its first argument. On the
    /// diagonal it equals `p''(y) / 2`.
    pub fn q_x_eval(&self, x: f64, y: f64) -> f64 {
        self.q_with_dx(x, y).1
    }

    /// Partial derivative of `q` with respect to its second argument.
    pub fn q_y_eval(&self, x: f64, y: f64) -> f64 {
        self.q_with_dx(y, x).1
    }

    /// Cauchy bound: every real root lies in `[-B, B]`.
    pub fn root_bound(&self) -> f64 {
        let lead = self.leading_coefficient().abs();
        let n = self.degree();
        1.0 + self.coeffs[..n]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs() / lead))
    }

    /// All real roots, which must be simple.
    pub fn real_roots(&self) -> Result<RootSet, PolyError> {
        if self.degree() == 0 {
            return Err(PolyError::DegreeZero);
        }
        let b = self.root_bound() * (1.0 + 1e-9);
        self.real_roots_in(-b, b)
    }

    /// Real roots in the closed interval `[lo, hi]`, which must be simple.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Result<RootSet, PolyError> {
        if self.degree() == 0 {
            return Err(PolyError::DegreeZero);
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(PolyError::BadInterval { lo, hi });
        }
        let scale = self.coefficient_scale();
        let roots = self.distinct_roots_in(lo, hi);
        for &r in &roots {
            let (_, d) = self.eval_with_derivative(r);
            if d.abs() < MULTIPLE_ROOT_TOL * (1.0 + r.abs() * scale) {
                return Err(PolyError::MultipleRootDetected {
                    root: r,
                    derivative: d.abs(),
                });
            }
        }
        Ok(RootSet { roots })
    }

    /// Distinct real roots in `[lo, hi]` without any multiplicity check.
    ///
    /// The interval is cut at the roots of `p'` (found recursively) so that
    /// `p` is monotone on every piece; sign changes are bisected and polished
    /// with one Newton step. Even-multiplicity roots show up as critical
    /// points where `p` vanishes to rounding accuracy. The zero polynomial
    /// and nonzero constants report no roots.
    pub fn distinct_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let critical: Vec<f64> = self
                    .derivative()
                    .distinct_roots_in(lo, hi)
                    .into_iter()
                    .filter(|&c| c > lo && c < hi)
                    .collect();
                let mut knots = Vec::with_capacity(critical.len() + 2);
                knots.push(lo);
                knots.extend_from_slice(&critical);
                knots.push(hi);

                let mut roots = Vec::new();
                for w in knots.windows(2) {
                    let (u, v) = (w[0], w[1]);
                    let (fu, fv) = (self.eval(u), self.eval(v));
                    if fu == 0.0 {
                        roots.push(u);
                    } else if fu * fv < 0.0 {
                        roots.push(self.bisect(u, v, fu));
                    }
                }
                if self.eval(hi) == 0.0 {
                    roots.push(hi);
                }
                for &c in &critical {
                    let touch = 1e3 * f64::EPSILON * self.eval_magnitude(c);
                    if self.eval(c).abs() <= touch {
                        roots.push(c);
                    }
                }
                roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut out: Vec<f64> = Vec::with_capacity(roots.len());
                for r in roots {
                    match out.last_mut() {
                        Some(last) if (r - *last).abs() <= 1e-10 * (1.0 + r.abs()) => {
                            if self.eval(r).abs() < self.eval(*last).abs() {
                                *last = r;
                            }
                        }
                        _ => out.push(r),
                    }
                }
                out
            }
        }
    }

    fn bisect(&self, mut u: f64, mut v: f64, mut fu: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (u + v);
            if v - u <= BISECTION_WIDTH * m.abs().max(1.0) {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fu < 0.0) {
                u = m;
                fu = fm;
            } else {
                v = m;
            }
        }
        let m = 0.5 * (u + v);
        let (fm, dm) = self.eval_with_derivative(m);
        if dm != 0.0 {
            let polished = m - fm / dm;
            if polished >= u && polished <= v && self.eval(polished).abs() <= fm.abs() {
                return polished;
            }
        }
        m
    }

    /// Critical points (roots of `p'`) and inflection points (roots of `p''`)
    /// strictly inside `(lo, hi)`.
    pub fn critical_and_inflection_points(
        &self,
        lo: f64,
        hi: f64,
    ) -> Result<CriticalStructure, PolyError> {
        if !(lo < hi) {
            return Err(PolyError::BadInterval { lo, hi });
        }
        let open_roots = |q: &Polynomial| -> Result<RootSet, PolyError> {
            if q.degree() == 0 {
                return Ok(RootSet::default());
            }
            let rs = q.real_roots_in(lo, hi)?;
            Ok(RootSet {
                roots: rs.roots.into_iter().filter(|&r| r > lo && r < hi).collect(),
            })
        };
        let d1 = self.derivative();
        let critical = open_roots(&d1)?;
        let inflection = open_roots(&d1.derivative())?;
        Ok(CriticalStructure {
            critical,
            inflection,
        })
    }
}

impl fmt::Display for Polynomial {
    /// Comma-separated ascending coefficients, the same format `from_str`
    /// accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Polynomial {
    type Err = PolyError;

    /// Parses either `cheb:k` or a comma-separated list of ascending
    /// coefficients such as `0.15,-0.05,0,-0.3333333333333333,0,0.2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let input = s.trim();
        let err = |reason: String| PolyError::Parse {
            input: input.to_string(),
            reason,
        };
        let poly = if let Some(k) = input.strip_prefix("cheb:") {
            let k: usize = k.trim().parse().map_err(|e| err(format!("{e}")))?;
            if k > MAX_DEGREE {
                return Err(PolyError::DegreeTooHigh(k));
            }
            Polynomial::chebyshev(k)
        } else {
            let coeffs = input
                .split(',')
                .map(|t| {
                    let v: f64 = t.trim().parse().map_err(|e| err(format!("{t:?}: {e}")))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(err(format!("non-finite coefficient {t:?}")))
                    }
                })
                .collect::<Result<Vec<f64>, _>>()?;
            Polynomial::new(coeffs)
        };
        if poly.degree() > MAX_DEGREE {
            return Err(PolyError::DegreeTooHigh(poly.degree()));
        }
        Ok(poly)
    }
}

/// Strictly increasing list of simple real roots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootSet {
    roots: Vec<f64>,
}

impl RootSet {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.roots.get(index).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().copied()
    }

    /// Indices of roots with a real root on both sides.
    pub fn internal_indices(&self) -> std::ops::Range<usize> {
        if self.roots.len() < 3 {
            0..0
        } else {
            1..self.roots.len() - 1
        }
    }
}

/// Roots of `p'` and `p''` inside an open interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalStructure {
    pub critical: RootSet,
    pub inflection: RootSet,
}

impl CriticalStructure {
    /// The inflection point when there is exactly one.
    pub fn single_inflection(&self) -> Option<f64> {
        match self.inflection.roots() {
            [g] => Some(*g),
            _ => None,
        }
    }
}

/// An interpolating polynomial kept in Newton form
/// `c_0 + c_1 (x - x_0) + c_2 (x - x_0)(x - x_1) + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonInterpolant {
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl NewtonInterpolant {
    /// Builds the Newton form directly from nodes and coefficients.
    pub fn from_parts(nodes: Vec<f64>, coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if nodes.len() != coeffs.len() {
            return Err(PolyError::LengthMismatch {
                nodes: nodes.len(),
                values: coeffs.len(),
            });
        }
        Ok(NewtonInterpolant { nodes, coeffs })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Divided differences `f[x_0], f[x_0, x_1], ...`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc = acc * (x - self.nodes[k]) + self.coeffs[k];
        }
        acc
    }

    /// Expands to monomial coefficients.
    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::zero();
        for k in (0..self.coeffs.len()).rev() {
            p = p.mul_linear(self.nodes[k]).add(&Polynomial::constant(self.coeffs[k]));
        }
        p
    }
}

/// Newton interpolation by divided differences.
pub fn newton_interpolate(nodes: &[f64], values: &[f64]) -> Result<NewtonInterpolant, PolyError> {
    if nodes.len() != values.len() {
        return Err(PolyError::LengthMismatch {
            nodes: nodes.len(),
            values: values.len(),
        });
    }
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0) {
                return Err(PolyError::DuplicateNodes(a));
            }
        }
    }
    let mut c = values.to_vec();
    let n = nodes.len();
    for j in 1..n {
        for i in (j..n).rev() {
            c[i] = (c[i] - c[i - 1]) / (nodes[i] - nodes[i - j]);
        }
    }
    Ok(NewtonInterpolant {
        nodes: nodes.to_vec(),
        coeffs: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t3() -> Polynomial {
        Polynomial::chebyshev(3)
    }

    fn p2() -> Polynomial {
        Polynomial::new(vec![0.15, -0.05, 0.0, -1.0 / 3.0, 0.0, 0.2])
    }

    // Direct double sum, used as an oracle for the Clenshaw evaluation.
    fn q_double_sum(p: &Polynomial, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for (k, &a) in p.coeffs().iter().enumerate().skip(1) {
            for i in 0..k {
                total += a * x.powi(i as i32) * y.powi((k - 1 - i) as i32);
            }
        }
        total
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(Polynomial::new(vec![]).degree(), 0);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(t3().eval(1.0), 1.0);
        assert!(t3().eval(3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(p2().eval(0.817633).abs() < 1e-5);
        let (v, d) = t3().eval_with_derivative(0.3);
        assert!((v - (4.0 * 0.027 - 0.9)).abs() < 1e-15);
        assert!((d - (12.0 * 0.09 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn derivatives() {
        assert_eq!(t3().derivative().coeffs(), &[-3.0, 0.0, 12.0]);
        assert!(Polynomial::constant(5.0).derivative().is_zero());
        let pp = t3().nth_derivative(2);
        assert_eq!(pp.coeffs(), &[0.0, 24.0]);
        assert_eq!(pp.real_roots().unwrap().roots(), &[0.0]);
    }

    #[test]
    fn chebyshev_coefficients() {
        assert_eq!(Polynomial::chebyshev(0).coeffs(), &[1.0]);
        assert_eq!(Polynomial::chebyshev(1).coeffs(), &[0.0, 1.0]);
        assert_eq!(Polynomial::chebyshev(4).coeffs(), &[1.0, 0.0, -8.0, 0.0, 8.0]);
        assert_eq!(
            Polynomial::chebyshev(5).coeffs(),
            &[0.0, 5.0, 0.0, -20.0, 0.0, 16.0]
        );
    }

    #[test]
    fn chebyshev_vanishes_at_chebyshev_nodes() {
        // Beyond this degree the coefficient growth alone exceeds 1e-10 of
        // rounding error in Horner evaluation.
        for k in 1..=14 {
            let t = Polynomial::chebyshev(k);
            for j in 0..k {
                let x = (std::f64::consts::PI * (j as f64 + 0.5) / k as f64).cos();
                assert!(t.eval(x).abs() <= 1e-10, "T_{k} at node {j}");
            }
        }
    }

    #[test]
    fn roots_of_t3_and_p2() {
        let r = t3().real_roots().unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert_eq!(r.len(), 3);
        assert!((r.roots()[0] + h).abs() < 1e-14);
        assert!(r.roots()[1].abs() < 1e-14);
        assert!((r.roots()[2] - h).abs() < 1e-14);

        let r = p2().real_roots().unwrap();
        let expected = [-1.43014, 0.817633, 1.17823];
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip(expected) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
            assert!(p2().eval(got).abs() <= ROOT_RESIDUAL_TOL);
        }
        assert_eq!(Polynomial::new(vec![0.0, 1.0]).real_roots().unwrap().roots(), &[0.0]);
    }

    #[test]
    fn chebyshev_roots_are_all_found() {
        for k in 1..=15 {
            let r = Polynomial::chebyshev(k).real_roots().unwrap();
            assert_eq!(r.len(), k);
            assert!(r.iter().all(|x| x > -1.0 && x < 1.0));
            assert!(r.roots().windows(2).all(|w| w[0] < w[1]));
            for (j, x) in r.iter().enumerate() {
                let exact = (std::f64::consts::PI * ((k - 1 - j) as f64 + 0.5) / k as f64).cos();
                assert!((x - exact).abs() < 1e-12, "T_{k} root {j}");
            }
        }
    }

    #[test]
    fn root_errors() {
        assert_eq!(Polynomial::constant(2.0).real_roots(), Err(PolyError::DegreeZero));
        // (x - 1)^2 (x + 2)
        let p = Polynomial::new(vec![2.0, -3.0, 0.0, 1.0]);
        assert!(matches!(
            p.real_roots(),
            Err(PolyError::MultipleRootDetected { .. })
        ));
        // x^3 has a triple root with a sign change
        let p = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            p.real_roots(),
            Err(PolyError::MultipleRootDetected { .. })
        ));
        // no real roots at all
        assert!(Polynomial::new(vec![1.0, 0.0, 1.0]).real_roots().unwrap().is_empty());
    }

    #[test]
    fn touching_roots_are_reported_without_the_check() {
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        let r = p.distinct_roots_in(-5.0, 5.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn critical_and_inflection() {
        let h = 3f64.sqrt() / 2.0;
        let cs = t3().critical_and_inflection_points(-h, h).unwrap();
        assert_eq!(cs.critical.len(), 2);
        assert!((cs.critical.roots()[0] + 0.5).abs() < 1e-14);
        assert!((cs.critical.roots()[1] - 0.5).abs() < 1e-14);
        assert_eq!(cs.single_inflection(), Some(0.0));

        let r = p2().real_roots().unwrap();
        let cs = p2()
            .critical_and_inflection_points(r.roots()[0], r.roots()[2])
            .unwrap();
        // p2'' = 4x^3 - 2x: roots 0 and +-1/sqrt(2), all inside (alpha_0, alpha_2)
        assert_eq!(cs.inflection.len(), 3);
        assert!(cs.single_inflection().is_none());
    }

    #[test]
    fn newton_interpolation_of_the_type_i_data() {
        let nodes = [1.0, 2.0, 3.0, 2.447213595];
        let values = [2.23606798, 1.118033989, -1.381966011, -1.0];
        let ni = newton_interpolate(&nodes, &values).unwrap();
        let expected = [2.23606798, -1.11803390, -0.6909830, 3.27254249];
        for (got, want) in ni.coefficients().iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        let p = ni.to_polynomial();
        for (x, v) in nodes.iter().zip(values) {
            assert!((p.eval(*x) - v).abs() < 1e-10);
            assert!((ni.eval(*x) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_interpolation_edge_cases() {
        let ni = newton_interpolate(&[0.0, 1.0, 2.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(ni.to_polynomial().degree(), 0);
        assert_eq!(ni.to_polynomial().coeffs(), &[4.0]);
        assert_eq!(
            newton_interpolate(&[0.0, 1.0, 0.0], &[1.0, 2.0, 3.0]),
            Err(PolyError::DuplicateNodes(0.0))
        );
        assert!(matches!(
            newton_interpolate(&[0.0], &[1.0, 2.0]),
            Err(PolyError::LengthMismatch { .. })
        ));
        // Sampling T_3 reproduces its coefficients.
        let nodes = [-0.9, -0.2, 0.35, 1.3];
        let values: Vec<f64> = nodes.iter().map(|&x| t3().eval(x)).collect();
        let p = newton_interpolate(&nodes, &values).unwrap().to_polynomial();
        for (a, b) in p.coeffs().iter().zip(t3().coeffs()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn q_for_t3_is_the_ellipse_polynomial() {
        let t = t3();
        assert_eq!(t.q_eval(0.0, 0.0), -3.0);
        assert_eq!(t.q_in_x(0.0).coeffs(), &[-3.0, 0.0, 4.0]);
        for &(x, y) in &[(0.3, -0.7), (1.5, 2.0), (-0.25, 0.9)] {
            let want = 4.0 * x * x + 4.0 * x * y + 4.0 * y * y - 3.0;
            assert!((t.q_eval(x, y) - want).abs() < 1e-13);
            assert!((t.q_x_eval(x, y) - (8.0 * x + 4.0 * y)).abs() < 1e-13);
            assert!((t.q_y_eval(x, y) - (4.0 * x + 8.0 * y)).abs() < 1e-13);
        }
        for &y in &[-0.8, 0.0, 0.4] {
            assert!((t.q_x_eval(y, y) - 12.0 * y).abs() < 1e-13);
        }
    }

    #[test]
    fn q_matches_the_double_sum() {
        let p = p2();
        for &(x, y) in &[(0.1, 0.2), (-1.3, 0.7), (1.1, 1.1), (2.0, -2.0)] {
            let a = p.q_eval(x, y);
            let b = q_double_sum(&p, x, y);
            assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
            let from_x = p.q_in_x(y).eval(x);
            assert!((a - from_x).abs() <= 1e-13 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn parse_and_display() {
        let p: Polynomial = "0.15,-0.05,0,-0.3333333333333333,0,0.2".parse().unwrap();
        assert_eq!(p.degree(), 5);
        assert_eq!(p.to_string().parse::<Polynomial>().unwrap(), p);
        assert_eq!("cheb:5".parse::<Polynomial>().unwrap(), Polynomial::chebyshev(5));
        assert!(matches!("1,x".parse::<Polynomial>(), Err(PolyError::Parse { .. })));
        assert!(matches!("cheb:65".parse::<Polynomial>(), Err(PolyError::DegreeTooHigh(65))));
        assert!(matches!("1,nan".parse::<Polynomial>(), Err(PolyError::Parse { .. })));
    }

    fn coeffs_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 2..9)
    }

    proptest! {
        #[test]
        fn q_telescopes(c in coeffs_strategy(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = Polynomial::new(c);
            let lhs = (x - y) * p.q_eval(x, y);
            let rhs = p.eval(x) - p.eval(y);
            let scale = p.eval_magnitude(x) + p.eval_magnitude(y);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
            prop_assert_eq!(p.q_eval(x, y), p.q_eval(y, x));
        }

        #[test]
        fn q_on_the_diagonal_is_the_derivative(c in coeffs_strategy(), x in -2.0f64..2.0) {
            let p = Polynomial::new(c);
            let d = p.derivative();
            let scale = d.eval_magnitude(x);
            prop_assert!((p.q_eval(x, x) - d.eval(x)).abs() <= 1e-12 * scale.max(1e-300));
            let half_pp = 0.5 * d.derivative().eval(x);
            let scale2 = d.derivative().eval_magnitude(x);
            prop_assert!((p.q_x_eval(x, x) - half_pp).abs() <= 1e-12 * scale2.max(1e-300));
        }

        #[test]
        fn interpolant_reproduces_data(vals in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let nodes: Vec<f64> = (0..vals.len()).map(|i| i as f64 * 0.7 - 1.0).collect();
            let ni = newton_interpolate(&nodes, &vals).unwrap();
            let p = ni.to_polynomial();
            for (x, v) in nodes.iter().zip(&vals) {
                prop_assert!((p.eval(*x) - v).abs() <= 1e-10 * (1.0 + v.abs()) * 10.0);
                prop_assert!((ni.eval(*x) - v).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }
    }
}
