//! Sets where a function is trapped between quasi-paraboloids of `phi`, the
//! locally quasi-Euclidean sets `A^loc_sigma`, and their distribution
//! functions.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{same_grid, ScalarField};
use crate::ma::PotentialField;
use crate::math::{self, Point, Sym2};
use crate::section::{d2_nodes, Section};

pub use crate::fit::{decay_fit, DecayFit};

/// Interior node count above which centers are subsampled.
pub const SUBSAMPLE_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodSetOptions {
    /// Pairs with `d^2 < d_min_factor * h^2` are left out of the sup.
    pub d_min_factor: f64,
    /// `None` picks every second node per axis above [`SUBSAMPLE_THRESHOLD`]
    /// interior nodes.
    pub stride: Option<usize>,
}

impl Default for GoodSetOptions {
    fn default() -> Self {
        GoodSetOptions {
            d_min_factor: 2.0,
            stride: None,
        }
    }
}

/// `2 sup |u(x) - u(xbar) - grad_u(xbar).(x - xbar)| / d(x, xbar)^2` over
/// active nodes with `d^2 >= d_min`, so `xbar` lies in `G_M` iff the result
/// is at most `M`.
pub fn minimal_opening(
    pot: &PotentialField,
    u: &[f64],
    grad_u: &[Point],
    xbar: usize,
    d_min: f64,
) -> Result<f64> {
    let grid = &pot.grid;
    let p = grid.point(xbar);
    let mut best: f64 = 0.0;
    let mut any = false;
    for &x in grid.active_nodes() {
        if x == xbar {
            continue;
        }
        let d2 = d2_nodes(pot, xbar, x);
        if !(d2 >= d_min) {
            continue;
        }
        any = true;
        let dev = u[x] - u[xbar] - math::dot(grad_u[xbar], math::sub(grid.point(x), p));
        best = best.max(dev.abs() / d2);
    }
    if !any {
        return Err(Error::NoAdmissiblePairs { node: xbar });
    }
    Ok(2.0 * best)
}

/// Minimal openings at a set of interior centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodSets {
    pub centers: Vec<usize>,
    /// Minimal opening per center, infinite where no pair was admissible.
    pub openings: Vec<f64>,
    /// Discrete Hessian of `u` per center.
    pub hessians: Vec<Sym2>,
    pub stride: usize,
    pub d_min: f64,
    /// Measure carried by each center.
    pub weight: f64,
}

impl GoodSets {
    /// Membership in `G_M` per center.
    pub fn contains(&self, m: f64) -> Vec<bool> {
        self.openings.iter().map(|&o| o <= m).collect()
    }

    /// Node mask of `G_M`, false away from the centers.
    pub fn mask(&self, len: usize, m: f64) -> Vec<bool> {
        let mut out = vec![false; len];
        for (&c, &o) in self.centers.iter().zip(&self.openings) {
            out[c] = o <= m;
        }
        out
    }

    /// `|Omega \ G_M|`, estimated from the centers.
    pub fn complement_measure(&self, m: f64) -> f64 {
        self.openings.iter().filter(|&&o| !(o <= m)).count() as f64 * self.weight
    }
}

pub fn good_sets(pot: &PotentialField, u: &ScalarField, opts: &GoodSetOptions) -> Result<GoodSets> {
    let grid = &pot.grid;
    same_grid(grid, &u.grid)?;
    let interior = grid.interior_count();
    let stride = opts
        .stride
        .unwrap_or(if interior > SUBSAMPLE_THRESHOLD { 2 } else { 1 })
        .max(1);
    let centers: Vec<usize> = grid
        .interior_nodes()
        .filter(|&n| {
            let (i, j) = grid.ij(n);
            i % stride == 0 && j % stride == 0
        })
        .collect();
    if centers.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let h = grid.spacing;
    let d_min = opts.d_min_factor * h * h;
    let (grad, hess) = grid.derivatives(&u.values);
    let openings = centers
        .iter()
        .map(|&c| match minimal_opening(pot, &u.values, &grad, c, d_min) {
            Ok(m) => Ok(m),
            Err(Error::NoAdmissiblePairs { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>>>()?;
    let hessians = centers.iter().map(|&c| hess[c]).collect();
    Ok(GoodSets {
        weight: interior as f64 * grid.cell_area() / centers.len() as f64,
        centers,
        openings,
        hessians,
        stride,
        d_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighborhood {
    /// Nodes within this many cells of the center.
    Cells(f64),
    /// Every active node, giving the global set `A_sigma`.
    Full,
}

impl Default for Neighborhood {
    fn default() -> Self {
        Neighborhood::Cells(5.0)
    }
}

/// Extreme values of `d(x, x0)^2 / |x - x0|^2` around each interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiRatios {
    pub neighborhood: Neighborhood,
    /// Interior nodes, ascending.
    pub nodes: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Relative slack in `d^2 >= sigma |x - x0|^2` absorbing rounding in the
/// ratio.
pub const RATIO_TOL: f64 = 1e-9;

impl QuasiRatios {
    /// Membership in `A^loc_sigma` per entry of `nodes`.
    pub fn contains(&self, sigma: f64) -> Vec<bool> {
        self.lower
            .iter()
            .map(|&l| l >= sigma * (1.0 - RATIO_TOL))
            .collect()
    }

    pub fn mask(&self, len: usize, sigma: f64) -> Vec<bool> {
        let mut out = vec![false; len];
        for (&n, inside) in self.nodes.iter().zip(self.contains(sigma)) {
            out[n] = inside;
        }
        out
    }

    fn lower_at(&self, node: usize) -> Option<f64> {
        self.nodes.binary_search(&node).ok().map(|k| self.lower[k])
    }

    /// Instance value of the constant `c` in `d^2 <= |x - x0|^2 / (c^2
    /// sigma^{n-1})`: the largest `c` valid at every node with `sigma` its
    /// own lower ratio.
    pub fn equivalence_constant(&self) -> f64 {
        let n1 = (crate::DIM - 1) as i32;
        self.lower
            .iter()
            .zip(&self.upper)
            .filter(|(l, u)| **l > 0.0 && **u > 0.0)
            .map(|(l, u)| 1.0 / (u * l.powi(n1)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn quasi_ratios(pot: &PotentialField, neighborhood: Neighborhood) -> QuasiRatios {
    let grid = &pot.grid;
    let nodes: Vec<usize> = grid.interior_nodes().collect();
    let mut lower = Vec::with_capacity(nodes.len());
    let mut upper = Vec::with_capacity(nodes.len());
    let scan = |x0: usize, x: usize, lo: &mut f64, hi: &mut f64| {
        let r2 = math::dist_sq(grid.point(x), grid.point(x0));
        let q = d2_nodes(pot, x0, x) / r2;
        *lo = lo.min(q);
        *hi = hi.max(q);
    };
    for &x0 in &nodes {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        match neighborhood {
            Neighborhood::Cells(r) => {
                let k = r.floor() as i64;
                for di in -k..=k {
                    for dj in -k..=k {
                        if (di, dj) == (0, 0) || ((di * di + dj * dj) as f64) > r * r {
                            continue;
                        }
                        if let Some(x) = grid.neighbor(x0, di, dj).filter(|&x| grid.is_active(x)) {
                            scan(x0, x, &mut lo, &mut hi);
                        }
                    }
                }
            }
            Neighborhood::Full => {
                for &x in grid.active_nodes() {
                    if x != x0 {
                        scan(x0, x, &mut lo, &mut hi);
                    }
                }
            }
        }
        lower.push(lo);
        upper.push(hi);
    }
    QuasiRatios {
        neighborhood,
        nodes,
        lower,
        upper,
    }
}

/// `sigma(beta) = (c beta^{(m-1)/2})^{-2/(n-1)}`.
pub fn sigma_for(c: f64, beta: f64, m: f64) -> f64 {
    let n1 = (crate::DIM - 1) as f64;
    (c * beta.powf(0.5 * (m - 1.0))).powf(-2.0 / n1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub beta: f64,
    pub m: f64,
    pub c: f64,
    pub sigma: f64,
    /// Centers with some `|D_ij u| > beta^m`.
    pub left: usize,
    /// Centers in the left set but inside both `A^loc_sigma` and `G_beta`.
    pub violations: Vec<usize>,
    pub checked: usize,
    pub fraction: f64,
}

/// Check `{|D_ij u| > beta^m} subset (Omega \ A^loc_sigma) u (Omega \
/// G_beta)` at the centers of `good`.
pub fn inclusion_check(
    good: &GoodSets,
    ratios: &QuasiRatios,
    c: f64,
    beta: f64,
    m: f64,
) -> Result<InclusionReport> {
    if !(m > 1.0 && beta > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "inclusion check needs m > 1, beta > 0, c > 0; got m = {m}, beta = {beta}, c = {c}"
        )));
    }
    let sigma = sigma_for(c, beta, m);
    let threshold = beta.powf(m);
    let mut left = 0;
    let mut violations = Vec::new();
    for (k, &x) in good.centers.iter().enumerate() {
        if !(good.hessians[k].max_abs_entry() > threshold) {
            continue;
        }
        left += 1;
        let in_a = ratios
            .lower_at(x)
            .is_some_and(|l| l >= sigma * (1.0 - RATIO_TOL));
        if in_a && good.openings[k] <= beta {
            violations.push(x);
        }
    }
    let checked = good.centers.len();
    Ok(InclusionReport {
        beta,
        m,
        c,
        sigma,
        left,
        fraction: violations.len() as f64 / checked as f64,
        violations,
        checked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSample {
    pub beta: f64,
    /// `|{|D_ij u| > beta^m}|`.
    pub f: f64,
    /// `|Omega \ A^loc_sigma(beta)|`.
    pub f1: f64,
    /// `|Omega \ G_beta|`.
    pub f2: f64,
}

pub fn distribution(
    good: &GoodSets,
    ratios: &QuasiRatios,
    c: f64,
    m: f64,
    betas: &[f64],
) -> Vec<DistributionSample> {
    betas
        .iter()
        .map(|&beta| {
            let sigma = sigma_for(c, beta, m);
            let threshold = beta.powf(m);
            let mut f = 0usize;
            let mut f1 = 0usize;
            for (k, &x) in good.centers.iter().enumerate() {
                if good.hessians[k].max_abs_entry() > threshold {
                    f += 1;
                }
                if !ratios
                    .lower_at(x)
                    .is_some_and(|l| l >= sigma * (1.0 - RATIO_TOL))
                {
                    f1 += 1;
                }
            }
            DistributionSample {
                beta,
                f: f as f64 * good.weight,
                f1: f1 as f64 * good.weight,
                f2: good.complement_measure(beta),
            }
        })
        .collect()
}

/// `|G_{N/t} n S| / |S|` over the centers of `good` inside the section.
pub fn density_in_section(good: &GoodSets, section: &Section, big_n: f64) -> Result<f64> {
    if !(big_n > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "N must be positive, got {big_n}"
        )));
    }
    let m = big_n / section.height;
    let (mut total, mut inside) = (0usize, 0usize);
    for (&c, &o) in good.centers.iter().zip(&good.openings) {
        if section.contains(c) {
            total += 1;
            if o <= m {
                inside += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(inside as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::grid::Grid;
    use alloc::sync::Arc;

    fn paraboloid(h: f64) -> PotentialField {
        let g = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), h).unwrap());
        PotentialField::from_fn(g, |p| 0.5 * math::norm_sq(p)).unwrap()
    }

    #[test]
    fn opening_of_phi_is_two() {
        let pot = paraboloid(1.0 / 16.0);
        let gs = good_sets(&pot, &pot.phi, &GoodSetOptions::default()).unwrap();
        assert!(gs.openings.iter().all(|&o| o == 2.0));
    }

    #[test]
    fn opening_of_affine_is_zero() {
        let pot = paraboloid(1.0 / 16.0);
        let u = ScalarField::from_fn(pot.grid.clone(), |p| 1.0 - 2.0 * p[0] + 0.5 * p[1]);
        let gs = good_sets(&pot, &u, &GoodSetOptions::default()).unwrap();
        assert!(gs.openings.iter().all(|&o| o < 1e-10));
    }

    #[test]
    fn ratio_is_one_half() {
        let pot = paraboloid(1.0 / 16.0);
        let r = quasi_ratios(&pot, Neighborhood::default());
        assert!(r.contains(0.5).iter().all(|&b| b));
        assert!(r.contains(0.6).iter().all(|&b| !b));
        assert!((r.equivalence_constant() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_formula() {
        // n = 2: sigma = (c beta^{(m-1)/2})^{-2}
        assert!((sigma_for(2.0, 9.0, 3.0) - 1.0 / 324.0).abs() < 1e-15);
    }
}
