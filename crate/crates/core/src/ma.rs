//! Dirichlet problem `det D^2 phi = g` by damped Newton on the nine-point
//! central-difference discretization, and the derived cofactor field.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, BoundaryLink, Grid, MatrixField, Region, ScalarField, VectorField};
use crate::linalg::{self, CsrBuilder};
use crate::math::{self, Point, Sym2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaOptions {
    /// Stopping tolerance on `max |det D^2 phi - g|` over interior nodes.
    pub tol_ma: f64,
    pub max_iter: usize,
    /// Smallest step length tried by the line search.
    pub damping_min: f64,
    /// Convexity tolerance relative to `Lambda`.
    pub tol_convex_rel: f64,
}

impl Default for MaOptions {
    fn default() -> Self {
        MaOptions {
            tol_ma: 1e-8,
            max_iter: 50,
            damping_min: 1.0 / 1024.0,
            tol_convex_rel: 1e-6,
        }
    }
}

/// Convergence record of a Newton solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
    /// Residual after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
    pub smallest_pivot: f64,
}

/// A grid-sampled convex potential with its discrete derivatives.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub grid: Arc<Grid>,
    pub phi: ScalarField,
    pub grad: VectorField,
    pub hess: MatrixField,
    /// Monge-Ampere density, `det D^2 phi` for analytic potentials.
    pub g: ScalarField,
    /// Values of `phi` at the grid's boundary sample points, parallel to
    /// [`Grid::links`].
    pub boundary_values: Vec<f64>,
    pub lambda: f64,
    pub big_lambda: f64,
    /// Minimum Hessian eigenvalue over interior nodes.
    pub convexity_margin: f64,
    pub stats: Option<NewtonStats>,
}

impl PotentialField {
    /// Wrap nodal values, computing derivatives by finite differences and
    /// the density as the discrete Hessian determinant. Boundary values are
    /// extrapolated along the Dirichlet links.
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        let bv = extrapolate_boundary(&grid, &values);
        Self::with_boundary(grid, values, bv)
    }

    /// Sample an analytic potential, including its exact boundary values.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = ScalarField::from_fn(grid.clone(), &f).values;
        let bv = grid.boundary_samples().into_iter().map(&f).collect();
        Self::with_boundary(grid, values, bv)
    }

    fn with_boundary(grid: Arc<Grid>, values: Vec<f64>, boundary_values: Vec<f64>) -> Result<Self> {
        let phi = ScalarField::new(grid.clone(), values)?;
        let (grad, hess) = phi.derivatives();
        let mut g = ScalarField::zeros(grid.clone());
        for &n in grid.active_nodes() {
            g.values[n] = hess.values[n].det();
        }
        let (lambda, big_lambda) = g.range(&Region::Interior)?;
        Ok(Self::assemble(
            grid,
            phi,
            grad,
            hess,
            g,
            boundary_values,
            lambda,
            big_lambda,
            None,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        grid: Arc<Grid>,
        phi: ScalarField,
        grad: VectorField,
        hess: MatrixField,
        g: ScalarField,
        boundary_values: Vec<f64>,
        lambda: f64,
        big_lambda: f64,
        stats: Option<NewtonStats>,
    ) -> Self {
        let convexity_margin = grid
            .interior_nodes()
            .map(|n| hess.values[n].min_eigenvalue())
            .fold(f64::INFINITY, f64::min);
        PotentialField {
            grid,
            phi,
            grad,
            hess,
            g,
            boundary_values,
            lambda,
            big_lambda,
            convexity_margin,
            stats,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.phi.values
    }

    /// `phi` at an arbitrary point by bilinear interpolation.
    pub fn eval(&self, p: Point) -> Option<f64> {
        self.phi.interpolate(p)
    }

    /// Subtract the affine function `a + b . x`.
    pub fn minus_affine(&self, a: f64, b: Point) -> Self {
        let mut out = self.clone();
        for &n in self.grid.active_nodes() {
            let x = self.grid.point(n);
            out.phi.values[n] -= a + math::dot(b, x);
            out.grad.values[n] = math::sub(self.grad.values[n], b);
        }
        for (v, z) in out.boundary_values.iter_mut().zip(self.grid.boundary_samples()) {
            *v -= a + math::dot(b, z);
        }
        out
    }

    /// Boundary sample points with the values of `phi` there.
    pub fn boundary_samples(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.grid
            .links()
            .iter()
            .zip(&self.boundary_values)
            .map(|(l, &v)| (l.sample_point(), v))
    }

    pub fn cofactor(&self) -> CofactorField {
        cofactor_field(self)
    }
}

/// Cofactor matrices `Phi = cof D^2 phi` at every node.
#[derive(Debug, Clone)]
pub struct CofactorField {
    pub field: MatrixField,
}

impl CofactorField {
    pub fn identity(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        CofactorField {
            field: MatrixField {
                grid,
                values: vec![Sym2::IDENTITY; n],
            },
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.field.grid
    }

    pub fn at(&self, node: usize) -> Sym2 {
        self.field.values[node]
    }

    /// Largest Euclidean norm of the discrete row divergence
    /// `sum_j D_j Phi^{ij}` over interior nodes at distance at least `margin`
    /// from the boundary whose neighbors are interior. Boundary-adjacent
    /// Hessians carry the O(1) error of the Dirichlet interpolation, so a
    /// positive margin is needed to see convergence.
    pub fn max_divergence(&self, margin: f64) -> f64 {
        let g = self.grid();
        let h = g.spacing;
        let v = &self.field.values;
        let mut worst: f64 = 0.0;
        for n in g.interior_nodes() {
            let (e, w, nn, s) = (n + 1, n - 1, n + g.nx, n - g.nx);
            if ![e, w, nn, s].iter().all(|&m| g.is_interior(m))
                || g.domain.distance_to_boundary(g.point(n)) < margin
            {
                continue;
            }
            let d1 = (v[e].xx - v[w].xx + v[nn].xy - v[s].xy) / (2.0 * h);
            let d2 = (v[e].xy - v[w].xy + v[nn].yy - v[s].yy) / (2.0 * h);
            worst = worst.max(d1.hypot(d2));
        }
        worst
    }
}

pub fn cofactor_field(potential: &PotentialField) -> CofactorField {
    CofactorField {
        field: MatrixField {
            grid: potential.grid.clone(),
            values: potential.hess.values.iter().map(|m| m.cofactor()).collect(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub min_eigenvalue: f64,
    pub node: usize,
    pub point: Point,
    pub tol: f64,
    pub pass: bool,
}

/// Minimum Hessian eigenvalue over interior nodes.
pub fn certify_convexity(potential: &PotentialField, tol: f64) -> ConvexityReport {
    let g = &potential.grid;
    let (mut min, mut node) = (f64::INFINITY, 0);
    for n in g.interior_nodes() {
        let e = potential.hess.values[n].min_eigenvalue();
        if e < min {
            min = e;
            node = n;
        }
    }
    ConvexityReport {
        min_eigenvalue: min,
        node,
        point: g.point(node),
        tol,
        pass: min >= -tol,
    }
}

/// Solve `det D^2 phi = g` with Dirichlet data.
pub fn solve_ma(
    grid: &Arc<Grid>,
    g: &ScalarField,
    boundary: &BoundaryData,
    opts: &MaOptions,
) -> Result<PotentialField> {
    grid.check_len(g.values.len())?;
    grid.check_len(boundary.grid.len())?;
    if boundary.values.len() != grid.boundary_nodes().len() {
        return Err(Error::GridMismatch {
            expected: grid.boundary_nodes().len(),
            found: boundary.values.len(),
        });
    }
    for n in grid.interior_nodes() {
        let v = g.values[n];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveDensity { node: n, value: v });
        }
    }
    let (lambda, big_lambda) = g.range(&Region::Interior)?;
    let poisson = initial_guess(grid, g, boundary)?;
    let (u, stats) = match newton(grid, g, boundary, opts, poisson.clone()) {
        Err(Error::NewtonFailed { .. }) => {
            let target = FIXED_POINT_TARGET * lambda;
            let start = fixed_point_sweeps(grid, g, boundary, poisson, FIXED_POINT_SWEEPS, target)?;
            newton(grid, g, boundary, opts, start)?
        }
        other => other?,
    };

    let boundary_values = if boundary.nodal {
        extrapolate_boundary(grid, &u)
    } else {
        boundary.values.clone()
    };
    let phi = ScalarField::new(grid.clone(), u)?;
    let (grad, hess) = phi.derivatives();
    let pot = PotentialField::assemble(
        grid.clone(),
        phi,
        grad,
        hess,
        g.clone(),
        boundary_values,
        lambda,
        big_lambda,
        Some(stats),
    );
    let tol = opts.tol_convex_rel * big_lambda;
    let report = certify_convexity(&pot, tol);
    if !report.pass {
        return Err(Error::NotConvex {
            node: report.node,
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    Ok(pot)
}

/// Budget and stopping residual, relative to `lambda`, of the fixed-point
/// sweeps that restart Newton after a failure from the Poisson guess.
const FIXED_POINT_SWEEPS: usize = 200;
const FIXED_POINT_TARGET: f64 = 0.5;

fn newton(
    grid: &Arc<Grid>,
    g: &ScalarField,
    boundary: &BoundaryData,
    opts: &MaOptions,
    mut u: Vec<f64>,
) -> Result<(Vec<f64>, NewtonStats)> {
    let active = grid.active_nodes();
    let m = active.len();
    let mut stats = NewtonStats {
        smallest_pivot: f64::INFINITY,
        ..Default::default()
    };
    let mut res_vec = vec![0.0; m];
    let mut res = residual(grid, &u, g, boundary, &mut res_vec);
    stats.history.push(res);
    let mut trial = u.clone();
    let mut trial_res = vec![0.0; m];
    let mut it = 0;
    while res > opts.tol_ma {
        if it == opts.max_iter {
            return Err(Error::NewtonFailed {
                iterations: it,
                residual: res,
            });
        }
        let jac = jacobian(grid, &u);
        let (step, info) = linalg::solve(&jac, &res_vec, None)?;
        if info.direct {
            stats.smallest_pivot = stats.smallest_pivot.min(info.smallest_pivot);
        }
        let mut alpha = 1.0;
        loop {
            for (k, &n) in active.iter().enumerate() {
                trial[n] = u[n] - alpha * step[k];
            }
            let r = residual(grid, &trial, g, boundary, &mut trial_res);
            if r < res {
                core::mem::swap(&mut u, &mut trial);
                core::mem::swap(&mut res_vec, &mut trial_res);
                res = r;
                break;
            }
            alpha *= 0.5;
            if alpha < opts.damping_min {
                return Err(Error::NewtonFailed {
                    iterations: it + 1,
                    residual: res,
                });
            }
        }
        it += 1;
        stats.history.push(res);
    }
    stats.iterations = it;
    stats.residual = res;
    Ok((u, stats))
}

/// Boundary values implied by nodal values through the Dirichlet links.
fn extrapolate_boundary(grid: &Grid, u: &[f64]) -> Vec<f64> {
    grid.boundary_nodes()
        .iter()
        .zip(grid.links())
        .map(|(&p, link)| match *link {
            BoundaryLink::Interpolated { theta, inner, .. } => (1.0 + theta) * u[p] - theta * u[inner],
            _ => u[p],
        })
        .collect()
}

/// Solve `Delta phi_0 = 2 sqrt(g)` with the five-point stencil.
fn initial_guess(grid: &Arc<Grid>, g: &ScalarField, boundary: &BoundaryData) -> Result<Vec<f64>> {
    let (a, mut rhs) = poisson_system(grid, boundary);
    for (k, &n) in grid.active_nodes().iter().enumerate() {
        if grid.is_interior(n) {
            rhs[k] = 2.0 * g.values[n].sqrt();
        }
    }
    let (x, _) = linalg::solve(&a, &rhs, None)?;
    Ok(scatter(grid, &x))
}

/// Iterate `Delta u = sqrt((u_xx - u_yy)^2 + 4 u_xy^2 + 4 g)` until the
/// residual of `det D^2 u = g` drops below `target` or `max_sweeps` Poisson
/// solves are spent. The iterates stay close to convex where Newton from
/// the Poisson guess is drawn away, e.g. near corners.
fn fixed_point_sweeps(
    grid: &Arc<Grid>,
    g: &ScalarField,
    boundary: &BoundaryData,
    mut u: Vec<f64>,
    max_sweeps: usize,
    target: f64,
) -> Result<Vec<f64>> {
    let active = grid.active_nodes();
    let (a, mut rhs) = poisson_system(grid, boundary);
    let lu = if a.n <= linalg::DIRECT_LIMIT {
        Some(linalg::BandedLu::factor(&a)?)
    } else {
        None
    };
    let mut res = vec![0.0; active.len()];
    for _ in 0..max_sweeps {
        if residual(grid, &u, g, boundary, &mut res) <= target {
            break;
        }
        for (k, &n) in active.iter().enumerate() {
            if grid.is_interior(n) {
                let m = grid.central_hessian(&u, n);
                rhs[k] = ((m.xx - m.yy).powi(2) + 4.0 * m.xy * m.xy + 4.0 * g.values[n]).sqrt();
            }
        }
        let x = match &lu {
            Some(lu) => lu.solve(&rhs),
            None => {
                let x0: Vec<f64> = active.iter().map(|&n| u[n]).collect();
                linalg::solve(&a, &rhs, Some(&x0))?.0
            }
        };
        u = scatter(grid, &x);
    }
    Ok(u)
}

/// Five-point Laplacian at interior nodes and Dirichlet rows elsewhere; the
/// right-hand side holds the Dirichlet data and zeros at interior rows.
fn poisson_system(grid: &Grid, boundary: &BoundaryData) -> (linalg::Csr, Vec<f64>) {
    let active = grid.active_nodes();
    let h2 = grid.spacing * grid.spacing;
    let mut b = CsrBuilder::new(active.len());
    let mut rhs = vec![0.0; active.len()];
    for (k, &n) in active.iter().enumerate() {
        if grid.is_interior(n) {
            b.add(k, -4.0 / h2);
            for nb in [n + 1, n - 1, n + grid.nx, n - grid.nx] {
                b.add(grid.active_index(nb).unwrap(), 1.0 / h2);
            }
        } else {
            rhs[k] = boundary_row(grid, boundary, n, k, &mut b);
        }
        b.finish_row();
    }
    (b.build(), rhs)
}

fn scatter(grid: &Grid, x: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; grid.len()];
    for (k, &n) in grid.active_nodes().iter().enumerate() {
        u[n] = x[k];
    }
    u
}

/// Add the Dirichlet row of boundary-adjacent node `n` (unknown `k`) and
/// return its right-hand side.
pub(crate) fn boundary_row(
    grid: &Grid,
    boundary: &BoundaryData,
    n: usize,
    k: usize,
    b: &mut CsrBuilder,
) -> f64 {
    let slot = grid.boundary_index(n).expect("boundary-adjacent node");
    let (inner, rhs) = boundary.row(slot);
    b.add(k, 1.0);
    if let Some((a, c)) = inner {
        b.add(grid.active_index(a).unwrap(), -c);
    }
    rhs
}

/// Residual of the Dirichlet row at a boundary-adjacent node.
pub(crate) fn boundary_residual(grid: &Grid, boundary: &BoundaryData, u: &[f64], n: usize) -> f64 {
    let slot = grid.boundary_index(n).expect("boundary-adjacent node");
    let (inner, rhs) = boundary.row(slot);
    u[n] - inner.map_or(0.0, |(a, c)| c * u[a]) - rhs
}

fn residual(
    grid: &Grid,
    u: &[f64],
    g: &ScalarField,
    boundary: &BoundaryData,
    out: &mut [f64],
) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &n) in grid.active_nodes().iter().enumerate() {
        let r = if grid.is_interior(n) {
            convexified_det(&grid.central_hessian(u, n)) - g.values[n]
        } else {
            boundary_residual(grid, boundary, u, n)
        };
        out[k] = r;
        worst = worst.max(r.abs());
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// `max(a, 0) max(c, 0) - b^2 + min(a, 0) + min(c, 0)` for `[[a, b], [b, c]]`.
/// Equal to the determinant when both diagonal entries are nonnegative, and
/// increasing in each of them, so Newton iterates are not drawn to concave
/// solutions of `det = g`.
pub(crate) fn convexified_det(m: &Sym2) -> f64 {
    m.xx.max(0.0) * m.yy.max(0.0) - m.xy * m.xy + m.xx.min(0.0) + m.yy.min(0.0)
}

/// Coefficients `a` with `d convexified_det = trace(a dM)`; the cofactor on
/// convex Hessians.
fn convexified_det_linearization(m: &Sym2) -> Sym2 {
    let d = |s: f64, other: f64| if s > 0.0 { other.max(0.0) } else { 1.0 };
    Sym2::new(d(m.xx, m.yy), -m.xy, d(m.yy, m.xx))
}

/// Push the nine-point row of `trace(a D^2 u)` at interior node `n`.
pub(crate) fn push_operator_row(grid: &Grid, a: &Sym2, n: usize, b: &mut CsrBuilder) {
    let h2 = grid.spacing * grid.spacing;
    let nx = grid.nx;
    let idx = |m: usize| grid.active_index(m).unwrap();
    b.add(idx(n), -2.0 * (a.xx + a.yy) / h2);
    b.add(idx(n + 1), a.xx / h2);
    b.add(idx(n - 1), a.xx / h2);
    b.add(idx(n + nx), a.yy / h2);
    b.add(idx(n - nx), a.yy / h2);
    let c = 2.0 * a.xy / (4.0 * h2);
    b.add(idx(n + nx + 1), c);
    b.add(idx(n - nx - 1), c);
    b.add(idx(n - nx + 1), -c);
    b.add(idx(n + nx - 1), -c);
}

fn jacobian(grid: &Grid, u: &[f64]) -> linalg::Csr {
    let active = grid.active_nodes();
    let mut b = CsrBuilder::new(active.len());
    for (k, &n) in active.iter().enumerate() {
        if grid.is_interior(n) {
            let lin = convexified_det_linearization(&grid.central_hessian(u, n));
            push_operator_row(grid, &lin, n, &mut b);
        } else {
            let slot = grid.boundary_index(n).unwrap();
            b.add(k, 1.0);
            // Dirichlet rows are linear; the coefficient does not depend on data
            if let BoundaryLink::Interpolated { theta, inner, .. } = grid.links()[slot]
            {
                b.add(grid.active_index(inner).unwrap(), -theta / (1.0 + theta));
            }
        }
        b.finish_row();
    }
    b.build()
}

/// Outcome of the boundary quadratic separation scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `min(min_ratio, 1 / max_ratio)`.
    pub rho0: f64,
    pub pairs: usize,
    pub floor: f64,
    pub pass: bool,
    /// Set when the domain is not uniformly convex, so separation is not
    /// expected to hold.
    pub warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationOptions {
    /// Pairs closer than this multiple of the spacing are skipped.
    pub min_distance_cells: f64,
    /// `rho0` must exceed this value to pass.
    pub floor: f64,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        SeparationOptions {
            min_distance_cells: 2.0,
            floor: 0.05,
        }
    }
}

/// Ratios `[phi(x) - phi(x0) - grad phi(x0).(x - x0)] / |x - x0|^2` over
/// pairs of boundary-adjacent nodes.
pub fn quadratic_separation_check(
    potential: &PotentialField,
    opts: &SeparationOptions,
) -> Result<SeparationReport> {
    let grid = &potential.grid;
    if !(opts.min_distance_cells > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "minimum pair distance must be positive, got {}",
            opts.min_distance_cells
        )));
    }
    let dmin2 = (opts.min_distance_cells * grid.spacing).powi(2);
    let nodes = grid.boundary_nodes();
    let phi = potential.values();
    let (mut lo, mut hi, mut pairs) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for &x0 in nodes {
        let p0 = grid.point(x0);
        let g0 = potential.grad.values[x0];
        for &x in nodes {
            let p = grid.point(x);
            let d = math::sub(p, p0);
            let r2 = math::norm_sq(d);
            if r2 < dmin2 {
                continue;
            }
            let r = (phi[x] - phi[x0] - math::dot(g0, d)) / r2;
            lo = lo.min(r);
            hi = hi.max(r);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::TooFewSamples {
            valid: 0,
            required: 1,
        });
    }
    let rho0 = lo.min(1.0 / hi);
    Ok(SeparationReport {
        min_ratio: lo,
        max_ratio: hi,
        rho0,
        pairs,
        floor: opts.floor,
        pass: lo > 0.0 && hi.is_finite() && rho0 > opts.floor,
        warning: grid.domain.uniform_convexity_modulus == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;

    fn disc_grid(h: f64) -> Arc<Grid> {
        Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), h).unwrap())
    }

    #[test]
    fn unit_disc_paraboloid() {
        let grid = disc_grid(1.0 / 64.0);
        let g = ScalarField::constant(grid.clone(), 1.0);
        let pot = solve_ma(&grid, &g, &BoundaryData::zero(grid.clone()), &MaOptions::default())
            .unwrap();
        let err = grid
            .active_nodes()
            .iter()
            .map(|&n| {
                let p = grid.point(n);
                (pot.phi.values[n] - 0.5 * (math::norm_sq(p) - 1.0)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "error {err}");
        assert!(pot.stats.as_ref().unwrap().residual <= 1e-8);
        assert!(pot.convexity_margin > 0.5, "{}", pot.convexity_margin);
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(Sym2::new(2.0, 0.0, 3.0).cofactor(), Sym2::new(3.0, 0.0, 2.0));
        assert_eq!(Sym2::new(2.0, 1.0, 2.0).cofactor(), Sym2::new(2.0, -1.0, 2.0));
        let grid = disc_grid(0.1);
        let pot = PotentialField::from_fn(grid.clone(), |p| 0.5 * math::norm_sq(p)).unwrap();
        let cof = pot.cofactor();
        for &n in grid.active_nodes() {
            let c = cof.at(n);
            assert!(c.sub(&Sym2::IDENTITY).max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn convexity_certificate() {
        let grid = disc_grid(0.1);
        let pot = PotentialField::from_fn(grid.clone(), |p| p[0] * p[0] - p[1] * p[1]).unwrap();
        let r = certify_convexity(&pot, 1e-6);
        assert!(!r.pass);
        assert!((r.min_eigenvalue + 2.0).abs() < 1e-9);
        let pot = PotentialField::from_fn(grid, |p| 0.5 * math::norm_sq(p)).unwrap();
        let r = certify_convexity(&pot, 1e-6);
        assert!(r.pass && (r.min_eigenvalue - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_density_rejected() {
        let grid = disc_grid(0.1);
        let g = ScalarField::from_fn(grid.clone(), |p| p[0]);
        let e = solve_ma(&grid, &g, &BoundaryData::zero(grid.clone()), &MaOptions::default())
            .unwrap_err();
        assert!(matches!(e, Error::NonPositiveDensity { .. }));
    }

    #[test]
    fn separation_of_paraboloid_is_one_half() {
        let grid = disc_grid(1.0 / 16.0);
        let pot = PotentialField::from_fn(grid, |p| 0.5 * math::norm_sq(p)).unwrap();
        let r = quadratic_separation_check(&pot, &SeparationOptions::default()).unwrap();
        assert!((r.min_ratio - 0.5).abs() < 1e-9 && (r.max_ratio - 0.5).abs() < 1e-9);
        assert!(r.pass && !r.warning);
        assert!((r.rho0 - 0.5).abs() < 1e-9);
    }
}
