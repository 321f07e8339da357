//! The secant root-finding method studied as a planar dynamical system.
//!
//! For a real polynomial `p` with simple real roots, the secant iteration
//! defines the plane map `S(x, y) = (y, y - p(y) / q(x, y))` where
//! `q(x, y) = (p(x) - p(y)) / (x - y)`. This crate computes its basins of
//! attraction, immediate basins and their holes, focal points, critical
//! curves and period-4 cycles.

pub mod basins;
pub mod cycles;
pub mod geometry;
pub mod linalg;
pub mod polynomial;
pub mod render;
pub mod secant_map;
pub mod verify;

pub use geometry::{Point, Rect};
pub use linalg::{Eigenvalues, Mat2};
pub use polynomial::{newton_interpolate, NewtonInterpolant, PolyError, Polynomial, RootSet};
pub use secant_map::{
    CriticalCurves, FocalPoint, GammaShape, MapError, OrbitOutcome, OrbitParams, OrbitResult,
    RootTriple, SecantSystem, Slope,
};
