//! Small fixed-size linear algebra used throughout the crate.

#[allow(unused_imports)]
use num_traits::Float;

/// A point (or vector) in the plane.
pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn norm_sq(a: Point) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// `s` reduced to `[0, 1)`.
#[inline]
pub fn wrap_unit(s: f64) -> f64 {
    s - s.floor()
}

#[inline]
pub fn dist_sq(a: Point, b: Point) -> f64 {
    norm_sq(sub(a, b))
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`. Only three entries are
/// stored, so symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Matrix of cofactors. In two dimensions this swaps the diagonal and
    /// negates the off-diagonal entry, so `cof(A) A = det(A) I` exactly.
    pub fn cofactor(&self) -> Sym2 {
        Sym2::new(self.yy, -self.xy, self.xx)
    }

    /// `trace(self * other)` for two symmetric matrices.
    pub fn trace_product(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let r = half_diff.hypot(self.xy);
        (mean - r, mean + r)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn frobenius(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    pub fn scaled(&self, s: f64) -> Sym2 {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn apply(&self, v: Point) -> Point {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// Quadratic form `v^T A v`.
    pub fn quad(&self, v: Point) -> f64 {
        dot(v, self.apply(v))
    }

    /// Matrix product `A B` of two symmetric matrices (not symmetric in
    /// general).
    pub fn mul(&self, o: &Sym2) -> Mat2 {
        Mat2::new(
            self.xx * o.xx + self.xy * o.xy,
            self.xx * o.xy + self.xy * o.yy,
            self.xy * o.xx + self.yy * o.xy,
            self.xy * o.xy + self.yy * o.yy,
        )
    }
}

/// General 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    /// Rotation taking `normal` (unit) to `e_2` and the tangent `(n_2, -n_1)`
    /// to `e_1`.
    pub fn frame_from_normal(normal: Point) -> Self {
        Mat2::new(normal[1], -normal[0], normal[0], normal[1])
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, v: Point) -> Point {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn scaled(&self, s: f64) -> Mat2 {
        Mat2::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    /// Spectral norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let ata = Sym2::new(
            self.m[0][0] * self.m[0][0] + self.m[1][0] * self.m[1][0],
            self.m[0][0] * self.m[0][1] + self.m[1][0] * self.m[1][1],
            self.m[0][1] * self.m[0][1] + self.m[1][1] * self.m[1][1],
        );
        ata.eigenvalues().1.max(0.0).sqrt()
    }

    /// `M^T S M`, the pull-back of a quadratic form.
    pub fn congruence(&self, s: &Sym2) -> Sym2 {
        let sm = [
            [
                s.xx * self.m[0][0] + s.xy * self.m[1][0],
                s.xx * self.m[0][1] + s.xy * self.m[1][1],
            ],
            [
                s.xy * self.m[0][0] + s.yy * self.m[1][0],
                s.xy * self.m[0][1] + s.yy * self.m[1][1],
            ],
        ];
        Sym2::new(
            self.m[0][0] * sm[0][0] + self.m[1][0] * sm[1][0],
            self.m[0][0] * sm[0][1] + self.m[1][0] * sm[1][1],
            self.m[0][1] * sm[0][1] + self.m[1][1] * sm[1][1],
        )
    }
}

/// Total order wrapper for finite floats used as heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_identity_holds() {
        let a = Sym2::new(2.0, 1.0, 2.0);
        let c = a.cofactor();
        assert_eq!(c, Sym2::new(2.0, -1.0, 2.0));
        let p = c.mul(&a);
        assert_eq!(p, Mat2::new(3.0, 0.0, 0.0, 3.0));
        assert_eq!(Sym2::new(2.0, 0.0, 3.0).cofactor(), Sym2::new(3.0, 0.0, 2.0));
    }

    #[test]
    fn eigenvalues_of_indefinite_matrix() {
        let (lo, hi) = Sym2::new(2.0, 0.0, -2.0).eigenvalues();
        assert_eq!((lo, hi), (-2.0, 2.0));
    }

    #[test]
    fn shear_has_unit_determinant_and_expected_norm() {
        let a = Mat2::new(1.0, -0.5, 0.0, 1.0);
        assert_eq!(a.det(), 1.0);
        let n = a.norm();
        // singular values of [[1, t], [0, 1]]: (|t| + sqrt(t^2 + 4)) / 2
        assert!((n - (0.5 + (0.25f64 + 4.0).sqrt()) / 2.0).abs() < 1e-14);
        assert!((a.inverse().unwrap().norm() - n).abs() < 1e-14);
    }

    #[test]
    fn congruence_matches_explicit_product() {
        let m = Mat2::new(1.0, 2.0, -0.5, 3.0);
        let s = Sym2::new(2.0, 0.3, 1.5);
        let c = m.congruence(&s);
        let v = [0.7, -1.1];
        let lhs = c.quad(v);
        let rhs = s.quad(m.apply(v));
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
