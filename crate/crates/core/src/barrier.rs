//! Explicit boundary supersolution for the linearized operator and boundary
//! Holder moduli.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::grid::ScalarField;
use crate::ma::PotentialField;
use crate::math::{self, Mat2, Point};

/// Potential with its tangent plane at a boundary point subtracted, and the
/// frame that sends the inward normal there to `e_n`.
#[derive(Debug, Clone)]
pub struct NormalizedPotential {
    pub potential: PotentialField,
    /// Boundary point taken as the origin.
    pub origin: Point,
    pub normal: Point,
    pub rotation: Mat2,
}

impl NormalizedPotential {
    /// Local coordinates `(x', x_n)` of a point.
    pub fn to_local(&self, x: Point) -> Point {
        self.rotation.apply(math::sub(x, self.origin))
    }
}

fn interpolated_gradient(pot: &PotentialField, p: Point) -> Option<Point> {
    let g = &pot.grid;
    let gx: Vec<f64> = pot.grad.values.iter().map(|v| v[0]).collect();
    let gy: Vec<f64> = pot.grad.values.iter().map(|v| v[1]).collect();
    Some([g.interpolate(&gx, p)?, g.interpolate(&gy, p)?])
}

/// Translate and rotate so the boundary point nearest `z` is the origin with
/// inner normal `e_n`, and subtract the tangent plane of `phi` there. Value
/// and gradient at the origin come from bilinear interpolation.
pub fn normalize_at_boundary(pot: &PotentialField, z: Point) -> Result<NormalizedPotential> {
    let domain = &pot.grid.domain;
    let origin = domain.project(z);
    let value = pot
        .eval(origin)
        .ok_or(Error::OutsideDomain { x: origin[0], y: origin[1] })?;
    let grad = interpolated_gradient(pot, origin)
        .ok_or(Error::OutsideDomain { x: origin[0], y: origin[1] })?;
    let normal = domain.inward_normal(origin);
    Ok(NormalizedPotential {
        potential: pot.minus_affine(value - math::dot(grad, origin), grad),
        origin,
        normal,
        rotation: Mat2::frame_from_normal(normal),
    })
}

/// Tolerance on `|phi(0)|` and `|grad phi(0)|` accepted as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Barrier {
    pub delta: f64,
    pub delta_tilde: f64,
    pub m_delta: f64,
    /// Coefficient of `x_n^2`, equal to `m_delta`.
    pub xn2_coeff: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    /// `w_delta` on every active node.
    pub w: ScalarField,
    /// Active nodes inside `B_delta`.
    pub region: Vec<usize>,
    pub frame: NormalizedPotential,
}

impl Barrier {
    /// `w_delta` at a point with `phi` value `phi`.
    pub fn formula(&self, x: Point, phi: f64) -> f64 {
        let y = self.frame.to_local(x);
        self.m_delta * y[1] + phi - self.delta_tilde * y[0] * y[0] - self.xn2_coeff * y[1] * y[1]
    }
}

/// `(delta_tilde, M_delta, x_n^2 coefficient)` for dimension `n`.
pub fn barrier_constants(lambda: f64, big_lambda: f64, delta: f64, n: u32) -> (f64, f64, f64) {
    let n1 = n as i32 - 1;
    let dt = 0.5 * delta.powi(3);
    let m = 2f64.powi(n1) * big_lambda.powi(n as i32) / lambda.powi(n1) / delta.powi(3 * n1);
    let c = big_lambda.powi(n as i32) / (lambda * dt).powi(n1);
    (dt, m, c)
}

pub fn build_supersolution(
    frame: &NormalizedPotential,
    lambda: f64,
    big_lambda: f64,
    delta: f64,
) -> Result<Barrier> {
    let pot = &frame.potential;
    if !(lambda > 0.0 && big_lambda >= lambda) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"
        )));
    }
    if !(delta > 0.0 && delta <= pot.grid.domain.rho) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, {}], got {delta}",
            pot.grid.domain.rho
        )));
    }
    let value = pot.eval(frame.origin).unwrap_or(f64::NAN);
    let gradient = interpolated_gradient(pot, frame.origin).map_or(f64::NAN, math::norm);
    if !(value.abs() <= NORMALIZATION_TOL && gradient <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { value, gradient });
    }
    let (delta_tilde, m_delta, xn2_coeff) = barrier_constants(lambda, big_lambda, delta, crate::DIM);
    let grid = pot.grid.clone();
    let mut barrier = Barrier {
        delta,
        delta_tilde,
        m_delta,
        xn2_coeff,
        lambda,
        big_lambda,
        w: ScalarField::zeros(grid.clone()),
        region: Vec::new(),
        frame: frame.clone(),
    };
    for &n in grid.active_nodes() {
        let x = grid.point(n);
        barrier.w.values[n] = barrier.formula(x, pot.phi.values[n]);
        if math::dist(x, frame.origin) < delta {
            barrier.region.push(n);
        }
    }
    Ok(barrier)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    /// `max L_phi w_delta` over interior nodes of `Omega n B_delta`.
    pub max_operator: f64,
    pub min_operator: f64,
    /// `-n Lambda + 0.1 n Lambda`.
    pub operator_bound: f64,
    pub interior_checked: usize,
    /// Minimum of `w_delta` on boundary samples inside `B_delta`.
    pub min_on_boundary: f64,
    /// Minimum of `w_delta` on `Omega n dB_delta`.
    pub min_on_sphere: f64,
    /// Allowance for interpolated values of `phi`.
    pub interpolation_tol: f64,
    pub operator_pass: bool,
    pub boundary_pass: bool,
    pub sphere_pass: bool,
}

impl BarrierReport {
    pub fn pass(&self) -> bool {
        self.operator_pass && self.boundary_pass && self.sphere_pass
    }
}

/// Angular samples on `dB_delta`.
pub const SPHERE_SAMPLES: usize = 720;

pub fn verify_supersolution(barrier: &Barrier) -> Result<BarrierReport> {
    let pot = &barrier.frame.potential;
    let grid = &pot.grid;
    let n = crate::DIM as f64;
    let bound = -n * barrier.big_lambda + 0.1 * n * barrier.big_lambda;
    let (mut lo, mut hi, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for &node in &barrier.region {
        if !grid.is_interior(node) {
            continue;
        }
        let cof = pot.hess.values[node].cofactor();
        let lw = cof.trace_product(&grid.central_hessian(&barrier.w.values, node));
        lo = lo.min(lw);
        hi = hi.max(lw);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    let origin = barrier.frame.origin;
    let min_on_boundary = pot
        .boundary_samples()
        .filter(|(z, _)| math::dist(*z, origin) < barrier.delta)
        .map(|(z, phi)| barrier.formula(z, phi))
        .fold(f64::INFINITY, f64::min);
    let mut min_on_sphere = f64::INFINITY;
    for k in 0..SPHERE_SAMPLES {
        let a = core::f64::consts::TAU * k as f64 / SPHERE_SAMPLES as f64;
        let x = math::add(origin, [barrier.delta * a.cos(), barrier.delta * a.sin()]);
        if !grid.domain.contains(x) {
            continue;
        }
        if let Some(phi) = pot.eval(x) {
            min_on_sphere = min_on_sphere.min(barrier.formula(x, phi));
        }
    }
    let h = grid.spacing;
    let curvature = grid
        .active_nodes()
        .iter()
        .map(|&v| pot.hess.values[v].max_abs_entry())
        .fold(0.0, f64::max);
    let interpolation_tol = 0.25 * h * h * curvature;
    Ok(BarrierReport {
        max_operator: hi,
        min_operator: lo,
        operator_bound: bound,
        interior_checked: count,
        min_on_boundary,
        min_on_sphere,
        interpolation_tol,
        operator_pass: hi <= bound,
        boundary_pass: !(min_on_boundary < -interpolation_tol),
        sphere_pass: !(min_on_sphere < barrier.delta_tilde - interpolation_tol),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub exponent: f64,
    pub constant: f64,
    pub residual: f64,
}

/// Angular samples on each circle of the Holder fit.
pub const HOLDER_SAMPLES: usize = 256;
pub const MIN_HOLDER_RADII: usize = 4;

/// Fit `sup_{|x - x0| = r} |u(x) - u(x0)| ~ C r^beta` over dyadic radii
/// `radius / 2^k` down to two grid cells. `u0` defaults to the interpolated
/// value at `x0`.
pub fn boundary_holder_modulus(
    u: &ScalarField,
    x0: Point,
    u0: Option<f64>,
    radius: f64,
) -> Result<HolderFit> {
    let grid = &u.grid;
    let u0 = match u0 {
        Some(v) => v,
        None => u
            .interpolate(x0)
            .ok_or(Error::OutsideDomain { x: x0[0], y: x0[1] })?,
    };
    let mut radii = Vec::new();
    let mut osc = Vec::new();
    let mut r = radius;
    while r >= 2.0 * grid.spacing {
        let mut best: Option<f64> = None;
        for k in 0..HOLDER_SAMPLES {
            let a = core::f64::consts::TAU * k as f64 / HOLDER_SAMPLES as f64;
            let x = math::add(x0, [r * a.cos(), r * a.sin()]);
            if !grid.domain.contains(x) {
                continue;
            }
            if let Some(v) = u.interpolate(x) {
                best = Some(best.unwrap_or(0.0).max((v - u0).abs()));
            }
        }
        if let Some(b) = best.filter(|&b| b > 0.0) {
            radii.push(r);
            osc.push(b);
        }
        r *= 0.5;
    }
    if radii.len() < MIN_HOLDER_RADII {
        return Err(Error::TooFewSamples {
            valid: radii.len(),
            required: MIN_HOLDER_RADII,
        });
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = osc.iter().map(|o| o.ln()).collect();
    let line = least_squares(&xs, &ys, None)?;
    Ok(HolderFit {
        radii,
        oscillations: osc,
        exponent: line.slope,
        constant: line.intercept.exp(),
        residual: line.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::grid::Grid;
    use alloc::sync::Arc;

    #[test]
    fn constants_match_closed_forms() {
        let (dt, m, c) = barrier_constants(1.0, 1.0, 0.5, 2);
        assert_eq!((dt, m, c), (0.0625, 16.0, 16.0));
        let (dt, m, _) = barrier_constants(1.0, 1.0, 1.0, 2);
        assert_eq!((dt, m), (0.5, 2.0));
        let (_, m2, _) = barrier_constants(1.0, 1.5, 0.5, 2);
        assert!(m2 > m);
    }

    #[test]
    fn paraboloid_barrier_passes() {
        let grid = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), 1.0 / 32.0).unwrap());
        let pot = PotentialField::from_fn(grid, |p| 0.5 * (math::norm_sq(p) - 1.0)).unwrap();
        let frame = normalize_at_boundary(&pot, [1.0, 0.0]).unwrap();
        let b = build_supersolution(&frame, 1.0, 1.0, 0.5).unwrap();
        let r = verify_supersolution(&b).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn unnormalized_is_rejected() {
        let grid = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), 1.0 / 16.0).unwrap());
        let pot = PotentialField::from_fn(grid, |p| 0.5 * (math::norm_sq(p) - 1.0)).unwrap();
        let mut frame = normalize_at_boundary(&pot, [1.0, 0.0]).unwrap();
        frame.potential = pot;
        assert!(matches!(
            build_supersolution(&frame, 1.0, 1.0, 0.5),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn affine_modulus_is_linear() {
        let grid = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), 1.0 / 64.0).unwrap());
        let u = ScalarField::from_fn(grid, |p| 2.0 * p[0] + 1.0);
        let fit = boundary_holder_modulus(&u, [1.0, 0.0], Some(3.0), 0.5).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-3, "{fit:?}");
    }
}
