//! Bounded convex planar domains and their geometric constants.
//!
//! Each domain is normalized around the origin: `rho` is the smaller of the
//! interior tangent-ball radius and the reciprocal of the enclosing radius
//! `max |x|` over the boundary, so that `Omega` sits inside `B_{1/rho}` and
//! every smooth boundary point carries an interior tangent ball `B_rho`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::math::{self, Mat2, Point};

const LEVEL_TOL: f64 = 1e-12;
const PROJECTION_SAMPLES: usize = 2048;
const GEOMETRY_SAMPLES: usize = 4096;

/// Affine map `z = linear * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: Mat2,
    pub offset: Point,
}

impl AffineMap {
    pub fn apply(&self, x: Point) -> Point {
        math::add(self.linear.apply(x), self.offset)
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = self.linear.inverse()?;
        let off = inv.apply(self.offset);
        Some(AffineMap {
            linear: inv,
            offset: [-off[0], -off[1]],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Disc {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Axis-aligned square centered at `center`.
    Square {
        center: Point,
        half_side: f64,
    },
    /// `|x/a|^p + |y/b|^p <= 1` with `p >= 2`.
    Superellipse {
        a: f64,
        b: f64,
        exponent: f64,
    },
    /// Counter-clockwise convex polygon.
    Polygon {
        vertices: Vec<Point>,
    },
    /// Image of another domain under an invertible affine map.
    Affine {
        base: Box<ConvexDomain>,
        map: AffineMap,
        inverse: AffineMap,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    pub kind: DomainKind,
    /// `min(interior ball radius, 1 / enclosing radius)`.
    pub rho: f64,
    /// Radius of the interior tangent balls (minimal curvature radius for
    /// smooth kinds, inscribed radius for polygons).
    pub interior_ball_radius: f64,
    /// `max |x|` over the boundary.
    pub enclosing_radius: f64,
    /// Lower bound on boundary curvature, zero when not uniformly convex.
    pub uniform_convexity_modulus: f64,
    pub diameter: f64,
}

impl ConvexDomain {
    pub fn disc(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self::finish(
            DomainKind::Disc { radius },
            radius,
            radius,
            1.0 / radius,
            2.0 * radius,
        ))
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        positive("semi-axis a", a)?;
        positive("semi-axis b", b)?;
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        // curvature radius ranges over [small^2/big, big^2/small]
        let min_radius = small * small / big;
        let ball = min_radius.min(small);
        Ok(Self::finish(
            DomainKind::Ellipse { a, b },
            ball,
            big,
            small / (big * big),
            2.0 * big,
        ))
    }

    pub fn square(half_side: f64) -> Result<Self> {
        Self::square_at([0.0, 0.0], half_side)
    }

    pub fn square_at(center: Point, half_side: f64) -> Result<Self> {
        positive("half side", half_side)?;
        let corners = [
            [center[0] - half_side, center[1] - half_side],
            [center[0] + half_side, center[1] - half_side],
            [center[0] + half_side, center[1] + half_side],
            [center[0] - half_side, center[1] + half_side],
        ];
        let enclosing = corners.iter().map(|c| math::norm(*c)).fold(0.0, f64::max);
        Ok(Self::finish(
            DomainKind::Square { center, half_side },
            half_side,
            enclosing,
            0.0,
            2.0 * core::f64::consts::SQRT_2 * half_side,
        ))
    }

    pub fn superellipse(a: f64, b: f64, exponent: f64) -> Result<Self> {
        positive("semi-axis a", a)?;
        positive("semi-axis b", b)?;
        if !(exponent >= 2.0) || !exponent.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "superellipse exponent must be finite and >= 2, got {exponent}"
            )));
        }
        if exponent == 2.0 {
            let mut d = Self::ellipse(a, b)?;
            d.kind = DomainKind::Superellipse { a, b, exponent };
            return Ok(d);
        }
        let kind = DomainKind::Superellipse { a, b, exponent };
        let (min_radius, _) = curvature_extremes(&kind);
        let inradius = a.min(b);
        let mut enclosing: f64 = 0.0;
        for k in 0..GEOMETRY_SAMPLES {
            let p = boundary_point_of(&kind, k as f64 / GEOMETRY_SAMPLES as f64);
            enclosing = enclosing.max(math::norm(p));
        }
        Ok(Self::finish(
            kind,
            min_radius.min(inradius),
            enclosing,
            0.0,
            2.0 * enclosing,
        ))
    }

    /// Convex polygon from vertices in either orientation. Collinear or
    /// reflex vertices are rejected with the offending index.
    pub fn polygon(vertices: &[Point]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        let turn = |i: usize| {
            let a = vertices[(i + n - 1) % n];
            let b = vertices[i];
            let c = vertices[(i + 1) % n];
            let u = math::sub(b, a);
            let v = math::sub(c, b);
            u[0] * v[1] - u[1] * v[0]
        };
        let area2: f64 = (0..n)
            .map(|i| {
                let p = vertices[i];
                let q = vertices[(i + 1) % n];
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        if area2.abs() <= 0.0 {
            return Err(Error::InvalidDomain("polygon has zero area".into()));
        }
        let sign = area2.signum();
        for i in 0..n {
            if turn(i) * sign <= 0.0 {
                return Err(Error::NonConvexPolygon { vertex: i });
            }
        }
        let mut verts: Vec<Point> = vertices.to_vec();
        if sign < 0.0 {
            verts.reverse();
        }
        let centroid = {
            let mut c = [0.0, 0.0];
            for v in &verts {
                c = math::add(c, *v);
            }
            math::scale(c, 1.0 / n as f64)
        };
        let mut inradius = f64::INFINITY;
        for i in 0..n {
            let (d, _) = edge_distance(centroid, verts[i], verts[(i + 1) % n]);
            inradius = inradius.min(d);
        }
        let enclosing = verts.iter().map(|v| math::norm(*v)).fold(0.0, f64::max);
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(math::dist(verts[i], verts[j]));
            }
        }
        Ok(Self::finish(
            DomainKind::Polygon { vertices: verts },
            inradius,
            enclosing,
            0.0,
            diameter,
        ))
    }

    /// Image `map(self)` of this domain.
    pub fn affine_image(&self, map: AffineMap) -> Result<Self> {
        let inverse = map
            .inverse()
            .ok_or_else(|| Error::InvalidDomain("affine map is singular".into()))?;
        let kind = DomainKind::Affine {
            base: Box::new(self.clone()),
            map,
            inverse,
        };
        let samples: Vec<Point> = (0..512)
            .map(|k| boundary_point_of(&kind, k as f64 / 512.0))
            .collect();
        let enclosing = samples.iter().map(|p| math::norm(*p)).fold(0.0, f64::max);
        let mut diameter: f64 = 0.0;
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                diameter = diameter.max(math::dist(samples[i], samples[j]));
            }
        }
        let (min_radius, max_curv) = curvature_extremes(&kind);
        let smooth = self.has_tangent_balls();
        let (ball, modulus) = if smooth {
            (min_radius, curvature_min(&kind))
        } else {
            let s = map.linear.inverse().map(|m| m.norm()).unwrap_or(1.0);
            (self.interior_ball_radius / s, 0.0)
        };
        let _ = max_curv;
        Ok(Self::finish(kind, ball, enclosing, modulus, diameter))
    }

    fn finish(
        kind: DomainKind,
        interior_ball_radius: f64,
        enclosing_radius: f64,
        uniform_convexity_modulus: f64,
        diameter: f64,
    ) -> Self {
        let rho = interior_ball_radius.min(1.0 / enclosing_radius);
        ConvexDomain {
            kind,
            rho,
            interior_ball_radius,
            enclosing_radius,
            uniform_convexity_modulus,
            diameter,
        }
    }

    /// Whether every boundary point has an interior tangent ball of radius
    /// `interior_ball_radius` (false for kinds with corners).
    pub fn has_tangent_balls(&self) -> bool {
        match &self.kind {
            DomainKind::Disc { .. } | DomainKind::Ellipse { .. } => true,
            DomainKind::Superellipse { .. } => true,
            DomainKind::Square { .. } | DomainKind::Polygon { .. } => false,
            DomainKind::Affine { base, .. } => base.has_tangent_balls(),
        }
    }

    /// Level function: negative inside, zero on the boundary, positive
    /// outside. Not a signed distance in general.
    pub fn level(&self, p: Point) -> f64 {
        level_of(&self.kind, p)
    }

    /// Membership in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        self.level(p) <= LEVEL_TOL
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.level(p).abs() <= LEVEL_TOL
    }

    /// Boundary parametrized by `s` in `[0, 1)`, counter-clockwise.
    pub fn boundary_point(&self, s: f64) -> Point {
        boundary_point_of(&self.kind, s)
    }

    /// Fraction `theta` in `[0, 1]` along the segment `inside -> outside`
    /// where the boundary is crossed.
    pub fn segment_crossing(&self, inside: Point, outside: Point) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if self.level(inside) > 0.0 {
            return 0.0;
        }
        if self.level(outside) <= 0.0 {
            return 1.0;
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let p = math::add(inside, math::scale(math::sub(outside, inside), mid));
            if self.level(p) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Nearest boundary point.
    pub fn project(&self, p: Point) -> Point {
        match &self.kind {
            DomainKind::Disc { radius } => {
                let r = math::norm(p);
                if r == 0.0 {
                    [*radius, 0.0]
                } else {
                    math::scale(p, radius / r)
                }
            }
            DomainKind::Square { center, half_side } => {
                let q = math::sub(p, *center);
                let s = *half_side;
                let inside = q[0].abs() <= s && q[1].abs() <= s;
                let r = if inside {
                    let dx = s - q[0].abs();
                    let dy = s - q[1].abs();
                    if dx <= dy {
                        [s.copysign(q[0]), q[1]]
                    } else {
                        [q[0], s.copysign(q[1])]
                    }
                } else {
                    [q[0].clamp(-s, s), q[1].clamp(-s, s)]
                };
                math::add(r, *center)
            }
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, vertices[0]);
                for i in 0..n {
                    let (d, q) = edge_distance(p, vertices[i], vertices[(i + 1) % n]);
                    if d < best.0 {
                        best = (d, q);
                    }
                }
                best.1
            }
            _ => self.project_sampled(p),
        }
    }

    fn project_sampled(&self, p: Point) -> Point {
        let n = PROJECTION_SAMPLES;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..n {
            let s = k as f64 / n as f64;
            let d = math::dist_sq(self.boundary_point(s), p);
            if d < best.0 {
                best = (d, s);
            }
        }
        // golden section on the bracketing parameter interval
        let step = 1.0 / n as f64;
        let (mut a, mut b) = (best.1 - step, best.1 + step);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let f = |s: f64| math::dist_sq(self.boundary_point(math::wrap_unit(s)), p);
        let mut c = b - gr * (b - a);
        let mut d = a + gr * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..60 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = f(d);
            }
        }
        self.boundary_point(math::wrap_unit(0.5 * (a + b)))
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        math::dist(p, self.project(p))
    }

    /// Inward unit normal at (or near) a boundary point, from the gradient
    /// of the level function.
    pub fn inward_normal(&self, z: Point) -> Point {
        if let DomainKind::Disc { .. } = self.kind {
            let r = math::norm(z);
            if r > 0.0 {
                return math::scale(z, -1.0 / r);
            }
        }
        let eps = 1e-6 * self.diameter.max(1e-12);
        let gx = self.level([z[0] + eps, z[1]]) - self.level([z[0] - eps, z[1]]);
        let gy = self.level([z[0], z[1] + eps]) - self.level([z[0], z[1] - eps]);
        let n = gx.hypot(gy);
        if n == 0.0 {
            return [0.0, 1.0];
        }
        [-gx / n, -gy / n]
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.kind {
            DomainKind::Disc { radius } => ([-radius, -radius], [*radius, *radius]),
            DomainKind::Ellipse { a, b } | DomainKind::Superellipse { a, b, .. } => {
                ([-a, -b], [*a, *b])
            }
            DomainKind::Square { center, half_side } => (
                [center[0] - half_side, center[1] - half_side],
                [center[0] + half_side, center[1] + half_side],
            ),
            DomainKind::Polygon { vertices } => bbox_of(vertices.iter().copied()),
            DomainKind::Affine { .. } => {
                let (lo, hi) = bbox_of(
                    (0..GEOMETRY_SAMPLES)
                        .map(|k| self.boundary_point(k as f64 / GEOMETRY_SAMPLES as f64)),
                );
                let pad = 1e-3 * self.diameter;
                ([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad])
            }
        }
    }

    /// Exact area where a closed form is available, otherwise the area of the
    /// sampled boundary polygon.
    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::Disc { radius } => PI * radius * radius,
            DomainKind::Ellipse { a, b } => PI * a * b,
            DomainKind::Square { half_side, .. } => 4.0 * half_side * half_side,
            DomainKind::Polygon { vertices } => shoelace(vertices),
            DomainKind::Affine { base, map, .. } => base.area() * map.linear.det().abs(),
            DomainKind::Superellipse { .. } => {
                let pts: Vec<Point> = (0..GEOMETRY_SAMPLES)
                    .map(|k| self.boundary_point(k as f64 / GEOMETRY_SAMPLES as f64))
                    .collect();
                shoelace(&pts)
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn shoelace(v: &[Point]) -> f64 {
    let n = v.len();
    let s: f64 = (0..n)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    0.5 * s.abs()
}

fn bbox_of(points: impl Iterator<Item = Point>) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    (lo, hi)
}

/// Distance from `p` to the segment `[a, b]` and the closest point.
fn edge_distance(p: Point, a: Point, b: Point) -> (f64, Point) {
    let ab = math::sub(b, a);
    let t = (math::dot(math::sub(p, a), ab) / math::norm_sq(ab)).clamp(0.0, 1.0);
    let q = math::add(a, math::scale(ab, t));
    (math::dist(p, q), q)
}

fn level_of(kind: &DomainKind, p: Point) -> f64 {
    match kind {
        DomainKind::Disc { radius } => math::norm(p) - radius,
        DomainKind::Ellipse { a, b } => (p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0,
        DomainKind::Square { center, half_side } => {
            (p[0] - center[0]).abs().max((p[1] - center[1]).abs()) - half_side
        }
        DomainKind::Superellipse { a, b, exponent } => {
            (p[0] / a).abs().powf(*exponent) + (p[1] / b).abs().powf(*exponent) - 1.0
        }
        DomainKind::Polygon { vertices } => {
            let n = vertices.len();
            let mut worst = f64::NEG_INFINITY;
            for i in 0..n {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let e = math::sub(b, a);
                let len = math::norm(e);
                // outward normal of a counter-clockwise edge
                let nrm = [e[1] / len, -e[0] / len];
                worst = worst.max(math::dot(math::sub(p, a), nrm));
            }
            worst
        }
        DomainKind::Affine { base, inverse, .. } => base.level(inverse.apply(p)),
    }
}

fn boundary_point_of(kind: &DomainKind, s: f64) -> Point {
    let theta = 2.0 * PI * s;
    match kind {
        DomainKind::Disc { radius } => [radius * theta.cos(), radius * theta.sin()],
        DomainKind::Ellipse { a, b } => [a * theta.cos(), b * theta.sin()],
        DomainKind::Superellipse { a, b, exponent } => {
            let e = 2.0 / exponent;
            let (c, sn) = (theta.cos(), theta.sin());
            [
                a * c.abs().powf(e).copysign(c),
                b * sn.abs().powf(e).copysign(sn),
            ]
        }
        DomainKind::Square { center, half_side } => {
            let corners = [
                [center[0] + half_side, center[1] - half_side],
                [center[0] + half_side, center[1] + half_side],
                [center[0] - half_side, center[1] + half_side],
                [center[0] - half_side, center[1] - half_side],
            ];
            along_polyline(&corners, s)
        }
        DomainKind::Polygon { vertices } => along_polyline(vertices, s),
        DomainKind::Affine { base, map, .. } => {
            let p = base.boundary_point(s);
            let q = map.apply(p);
            if map.linear.det() < 0.0 {
                // keep counter-clockwise orientation
                map.apply(base.boundary_point(math::wrap_unit(1.0 - s)))
            } else {
                q
            }
        }
    }
}

/// Arc-length parametrization of a closed polyline.
fn along_polyline(vertices: &[Point], s: f64) -> Point {
    let n = vertices.len();
    let lengths: Vec<f64> = (0..n)
        .map(|i| math::dist(vertices[i], vertices[(i + 1) % n]))
        .collect();
    let total: f64 = lengths.iter().sum();
    let mut target = math::wrap_unit(s) * total;
    for i in 0..n {
        if target <= lengths[i] || i == n - 1 {
            let t = (target / lengths[i]).clamp(0.0, 1.0);
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            return math::add(a, math::scale(math::sub(b, a), t));
        }
        target -= lengths[i];
    }
    vertices[0]
}

/// Signed curvature samples of a parametrized boundary; returns
/// `(min curvature radius, max curvature)`.
fn curvature_extremes(kind: &DomainKind) -> (f64, f64) {
    let n = GEOMETRY_SAMPLES;
    let ds = 1.0 / (4.0 * n as f64);
    let mut max_k: f64 = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let kappa = curvature_at(kind, s, ds);
        if kappa.is_finite() {
            max_k = max_k.max(kappa);
        }
    }
    (1.0 / max_k, max_k)
}

fn curvature_min(kind: &DomainKind) -> f64 {
    let n = GEOMETRY_SAMPLES;
    let ds = 1.0 / (4.0 * n as f64);
    let mut min_k = f64::INFINITY;
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let kappa = curvature_at(kind, s, ds);
        if kappa.is_finite() {
            min_k = min_k.min(kappa);
        }
    }
    min_k.max(0.0)
}

fn curvature_at(kind: &DomainKind, s: f64, ds: f64) -> f64 {
    let p0 = boundary_point_of(kind, s - ds);
    let p1 = boundary_point_of(kind, s);
    let p2 = boundary_point_of(kind, s + ds);
    let d1 = math::scale(math::sub(p2, p0), 0.5 / ds);
    let d2 = math::scale(
        math::add(math::sub(p2, math::scale(p1, 2.0)), p0),
        1.0 / (ds * ds),
    );
    let speed = math::norm(d1);
    (d1[0] * d2[1] - d1[1] * d2[0]).abs() / (speed * speed * speed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disc_has_unit_rho() {
        let d = ConvexDomain::disc(1.0).unwrap();
        assert_eq!(d.rho, 1.0);
        assert_eq!(d.uniform_convexity_modulus, 1.0);
    }

    #[test]
    fn ellipse_rho_is_minimal_curvature_radius() {
        // oracle: curvature radius of (a cos t, b sin t) is
        // (a^2 sin^2 + b^2 cos^2)^{3/2} / (a b), minimal at t = 0: b^2 / a
        let d = ConvexDomain::ellipse(1.0, 0.5).unwrap();
        let oracle = (0..10_000)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 10_000.0;
                let (a, b) = (1.0f64, 0.5f64);
                (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5) / (a * b)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((oracle - 0.25).abs() < 1e-9);
        assert!((d.rho - 0.25).abs() < 1e-12);
        assert!((d.uniform_convexity_modulus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn square_rho_from_inscribed_and_circumscribed_radii() {
        let d = ConvexDomain::square(1.0).unwrap();
        assert_eq!(d.uniform_convexity_modulus, 0.0);
        assert!((d.rho - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_polygon_reports_vertex() {
        let v = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 2.0], [0.0, 2.0]];
        assert_eq!(
            ConvexDomain::polygon(&v).unwrap_err(),
            Error::NonConvexPolygon { vertex: 2 }
        );
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let v = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        let d = ConvexDomain::polygon(&v).unwrap();
        assert!(d.contains([0.5, 0.5]));
        assert!(!d.contains([1.5, 0.5]));
        assert!((d.area() - 1.0).abs() < 1e-15);
        assert!((d.interior_ball_radius - 0.5).abs() < 1e-15);
    }

    #[test]
    fn superellipse_is_not_uniformly_convex() {
        let d = ConvexDomain::superellipse(1.0, 1.0, 4.0).unwrap();
        assert_eq!(d.uniform_convexity_modulus, 0.0);
        assert!(d.rho > 0.0 && d.rho < 1.0);
        assert!(d.contains([0.9, 0.0]));
        assert!(d.contains([0.8, 0.8]));
        assert!(!d.contains([0.9, 0.9]));
    }

    #[test]
    fn segment_crossing_on_disc() {
        let d = ConvexDomain::disc(1.0).unwrap();
        let t = d.segment_crossing([0.5, 0.0], [1.5, 0.0]);
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_projection_matches_exact_ellipse_geometry() {
        let d = ConvexDomain::ellipse(2.0, 1.0).unwrap();
        let q = d.project([0.0, 0.4]);
        assert!(q[0].abs() < 1e-6 && (q[1] - 1.0).abs() < 1e-9);
        let n = d.inward_normal([2.0, 0.0]);
        assert!((n[0] + 1.0).abs() < 1e-6 && n[1].abs() < 1e-6);
    }

    #[test]
    fn affine_image_maps_membership() {
        let base = ConvexDomain::disc(1.0).unwrap();
        let map = AffineMap {
            linear: Mat2::new(2.0, 0.0, 0.0, 0.5),
            offset: [1.0, 0.0],
        };
        let img = base.affine_image(map).unwrap();
        assert!(img.contains([2.9, 0.0]));
        assert!(!img.contains([1.0, 0.6]));
        assert!((img.area() - PI).abs() < 1e-12);
    }

    /// Every boundary sample of a smooth domain admits an interior tangent
    /// ball of radius rho.
    #[test]
    fn tangent_balls_fit_inside_smooth_domains() {
        for d in [
            ConvexDomain::disc(1.0).unwrap(),
            ConvexDomain::ellipse(1.0, 0.5).unwrap(),
            ConvexDomain::ellipse(0.6, 1.2).unwrap(),
        ] {
            assert!(d.has_tangent_balls());
            for k in 0..256 {
                let z = d.boundary_point(k as f64 / 256.0);
                let nrm = d.inward_normal(z);
                let c = math::add(z, math::scale(nrm, d.rho));
                for m in 0..128 {
                    let a = 2.0 * PI * m as f64 / 128.0;
                    let p = [c[0] + d.rho * a.cos(), c[1] + d.rho * a.sin()];
                    assert!(d.level(p) <= 1e-6, "tangent ball leaves domain");
                }
            }
        }
    }

    #[test]
    fn convexity_by_midpoints() {
        let doms = [
            ConvexDomain::disc(1.0).unwrap(),
            ConvexDomain::ellipse(1.0, 0.5).unwrap(),
            ConvexDomain::square(1.0).unwrap(),
            ConvexDomain::superellipse(1.0, 0.7, 6.0).unwrap(),
            ConvexDomain::polygon(&[[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [0.5, 1.5]]).unwrap(),
        ];
        for d in &doms {
            let pts: Vec<Point> = (0..64).map(|k| d.boundary_point(k as f64 / 64.0)).collect();
            for a in &pts {
                for b in &pts {
                    let m = math::scale(math::add(*a, *b), 0.5);
                    assert!(d.level(m) <= 1e-9);
                }
            }
        }
    }
}
