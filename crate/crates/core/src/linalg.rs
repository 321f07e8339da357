//! 2x2 matrices with a closed-form eigen solver.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Eigenvalues of a real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eigenvalues {
    /// Real pair ordered by decreasing magnitude.
    Real { first: f64, second: f64 },
    /// Complex conjugate pair `re +- i im`, `im > 0`.
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    pub fn magnitudes(&self) -> [f64; 2] {
        match *self {
            Eigenvalues::Real { first, second } => [first.abs(), second.abs()],
            Eigenvalues::Complex { re, im } => {
                let m = re.hypot(im);
                [m, m]
            }
        }
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace();
        let det = self.det();
        let half = 0.5 * tr;
        let disc = half * half - det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            // Larger-magnitude root first; the other from det to avoid cancellation.
            let big = if half >= 0.0 { half + root } else { half - root };
            let small = if big != 0.0 { det / big } else { half - root };
            Eigenvalues::Real {
                first: big,
                second: small,
            }
        } else {
            Eigenvalues::Complex {
                re: half,
                im: (-disc).sqrt(),
            }
        }
    }

    /// Unit eigenvector for a real eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> [f64; 2] {
        let [[a, b], [c, d]] = self.0;
        // Rows of (M - lambda I); take the row with larger norm.
        let r1 = [a - lambda, b];
        let r2 = [c, d - lambda];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let v = if n1 == 0.0 && n2 == 0.0 {
            [1.0, 0.0]
        } else if n1 >= n2 {
            [-r1[1], r1[0]]
        } else {
            [-r2[1], r2[0]]
        };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve() {
        let a = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        let x = solve_dense(a, vec![7.0, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn eigen_of_diagonal_and_rotation() {
        let m = Mat2::new(2.0, 0.0, 0.0, -5.0);
        assert_eq!(
            m.eigenvalues(),
            Eigenvalues::Real {
                first: -5.0,
                second: 2.0
            }
        );
        let r = Mat2::new(0.0, -1.0, 1.0, 0.0);
        assert_eq!(r.eigenvalues(), Eigenvalues::Complex { re: 0.0, im: 1.0 });
        assert_eq!(r.eigenvalues().magnitudes(), [1.0, 1.0]);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let m = Mat2::new(207.26, 236.15, 242.42, 276.37);
        if let Eigenvalues::Real { first, second } = m.eigenvalues() {
            assert!((first * second - m.det()).abs() <= 1e-8 * m.det().abs());
            for l in [first, second] {
                let v = m.eigenvector(l);
                let mv = m.apply(v);
                assert!((mv[0] - l * v[0]).abs() < 1e-9 * first.abs());
                assert!((mv[1] - l * v[1]).abs() < 1e-9 * first.abs());
            }
        } else {
            panic!("expected real eigenvalues");
        }
    }

    #[test]
    fn product_is_row_by_column() {
        let a = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let b = Mat2::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(a.mul(&b), Mat2::new(2.0, 1.0, 4.0, 3.0));
        assert_eq!(Mat2::IDENTITY.mul(&a), a);
    }
}
