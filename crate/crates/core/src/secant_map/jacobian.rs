use super::{MapError, SecantSystem};
use crate::geometry::Point;
use crate::linalg::Mat2;

impl SecantSystem {
    /// `DS(x, y) = [[0, 1], [p(y) q_x / q^2, 1 - (p'(y) q - p(y) q_y) / q^2]]`.
    pub fn jacobian(&self, pt: Point) -> Result<Mat2, MapError> {
        let (q, qx) = self.poly.q_with_dx(pt.x, pt.y);
        let qy = self.poly.q_y_eval(pt.x, pt.y);
        let (py, dpy) = self.poly.eval_with_derivative(pt.y);
        if self.is_singular(q, py) {
            return Err(MapError::Singular(pt));
        }
        let q2 = q * q;
        Ok(Mat2::new(
            0.0,
            1.0,
            py * qx / q2,
            1.0 - (dpy * q - py * qy) / q2,
        ))
    }

    /// `D(S^n)` at `pt` by the chain rule; the latest step's matrix is the
    /// leftmost factor.
    pub fn jacobian_along_orbit(&self, pt: Point, n: usize) -> Result<Mat2, MapError> {
        let mut m = Mat2::IDENTITY;
        let mut cur = pt;
        for _ in 0..n {
            m = self.jacobian(cur)?.mul(&m);
            cur = self.step(cur)?;
        }
        Ok(m)
    }
}
