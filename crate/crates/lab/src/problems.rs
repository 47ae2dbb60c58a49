//! Shared problem setup: grids, densities, potentials and right-hand sides.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ma_lab_core::ma::solve_ma;
use ma_lab_core::math::Point;
use ma_lab_core::{BoundaryData, ConvexDomain, Grid, MatrixField, PotentialField, ScalarField};

use crate::config::{DomainSpec, ExperimentConfig, G0Form};
use crate::error::{Context, LabError};

pub fn domain(spec: &DomainSpec) -> Result<ConvexDomain, LabError> {
    spec.build().context(format!("building {} domain", spec.kind()))
}

pub fn grid(spec: &DomainSpec, h: f64) -> Result<Arc<Grid>, LabError> {
    let d = domain(spec)?;
    Grid::new(d, h)
        .map(Arc::new)
        .context(format!("discretizing {} at spacing {h}", spec.kind()))
}

/// The perturbation `g0`, scaled to the bounding box of the domain.
pub fn g0(form: G0Form, domain: &ConvexDomain) -> impl Fn(Point) -> f64 + Send + Sync {
    let (lo, hi) = domain.bounding_box();
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let l = [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])];
    move |p: Point| match form {
        G0Form::Sin => (PI * (p[0] - c[0]) / l[0]).sin() * (PI * (p[1] - c[1]) / l[1]).sin(),
        G0Form::Constant => 1.0,
    }
}

/// `1 + eps g0`.
pub fn density(grid: &Arc<Grid>, eps: f64, form: G0Form) -> ScalarField {
    let g0 = g0(form, &grid.domain);
    ScalarField::from_fn(grid.clone(), |p| 1.0 + eps * g0(p))
}

/// Solve `det D^2 phi = 1 + eps g0` with zero boundary values.
pub fn potential(
    cfg: &ExperimentConfig,
    grid: &Arc<Grid>,
    eps: f64,
    form: G0Form,
) -> Result<PotentialField, LabError> {
    let g = density(grid, eps, form);
    solve_ma(grid, &g, &BoundaryData::zero(grid.clone()), &cfg.solver.ma_options()).context(format!(
        "Monge-Ampere solve with eps = {eps} at spacing {}",
        grid.spacing
    ))
}

/// Smooth right-hand side built from a few seeded Fourier modes, bounded
/// below by 1/2.
pub fn smooth_rhs(grid: &Arc<Grid>, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.05..0.12),
            )
        })
        .collect();
    ScalarField::from_fn(grid.clone(), move |p| {
        1.0 + modes
            .iter()
            .map(|&(k1, k2, ph, a)| a * (k1 * p[0] + k2 * p[1] + ph).cos())
            .sum::<f64>()
    })
}

pub fn cofactor_matrix(pot: &PotentialField) -> MatrixField {
    let c = pot.cofactor();
    MatrixField {
        grid: pot.grid.clone(),
        values: (0..pot.grid.len()).map(|n| c.at(n)).collect(),
    }
}

/// Slope of `log y` against `log x` by ordinary least squares.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    ma_lab_core::fit::least_squares(&lx, &ly, None)
        .ok()
        .map(|l| l.slope)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `max(a, b) / min(a, b)`.
pub fn spread(a: f64, b: f64) -> f64 {
    a.max(b) / a.min(b)
}
