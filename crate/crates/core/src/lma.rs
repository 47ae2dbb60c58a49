//! Linearized Monge-Ampere equation `Phi^{ij} u_{ij} = f` in non-divergence
//! form with Dirichlet data.

use alloc::sync::Arc;
use alloc::vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{same_grid, BoundaryData, Grid, Region, ScalarField};
use crate::linalg::{self, CsrBuilder};
use crate::ma::{boundary_row, push_operator_row, CofactorField};

#[derive(Debug, Clone)]
pub struct LmaSolution {
    pub u: ScalarField,
    pub f: ScalarField,
    pub boundary: BoundaryData,
    /// `max |trace(Phi D^2 u) - f|` over interior nodes.
    pub residual_max: f64,
    /// Smallest pivot of the direct factorization, zero for iterative solves.
    pub smallest_pivot: f64,
}

impl LmaSolution {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.u.grid
    }
}

/// Assemble the nine-point system at interior nodes and the Dirichlet rows
/// at boundary-adjacent nodes, then solve it.
pub fn solve_lma(
    cofactor: &CofactorField,
    f: &ScalarField,
    boundary: &BoundaryData,
) -> Result<LmaSolution> {
    let grid = cofactor.grid();
    same_grid(grid, &f.grid)?;
    same_grid(grid, &boundary.grid)?;
    if let Some(n) = grid.interior_nodes().find(|&n| !f.values[n].is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "right-hand side is not finite at node {n}"
        )));
    }
    let active = grid.active_nodes();
    let mut b = CsrBuilder::new(active.len());
    let mut rhs = vec![0.0; active.len()];
    for (k, &n) in active.iter().enumerate() {
        if grid.is_interior(n) {
            push_operator_row(grid, &cofactor.at(n), n, &mut b);
            rhs[k] = f.values[n];
        } else {
            rhs[k] = boundary_row(grid, boundary, n, k, &mut b);
        }
        b.finish_row();
    }
    let (x, info) = linalg::solve(&b.build(), &rhs, None)?;
    let mut u = ScalarField::zeros(grid.clone());
    for (k, &n) in active.iter().enumerate() {
        u.values[n] = x[k];
    }
    let residual_max = grid
        .interior_nodes()
        .map(|n| {
            (cofactor.at(n).trace_product(&grid.central_hessian(&u.values, n)) - f.values[n]).abs()
        })
        .fold(0.0, f64::max);
    Ok(LmaSolution {
        u,
        f: f.clone(),
        boundary: boundary.clone(),
        residual_max,
        smallest_pivot: info.smallest_pivot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbpReport {
    pub u_sup: f64,
    pub f_norm: f64,
    pub diameter: f64,
    /// `||u||_inf / (diam ||f||_{L^n})`, zero when both vanish.
    pub ratio: f64,
    pub finite: bool,
}

/// Ratio of the ABP estimate with `n = 2`.
pub fn abp_check(solution: &LmaSolution) -> Result<AbpReport> {
    let grid = solution.grid();
    let u_sup = solution.u.lp_norm(f64::INFINITY, &Region::Domain)?;
    let f_norm = solution.f.lp_norm(crate::DIM as f64, &Region::Domain)?;
    let diameter = grid.domain.diameter;
    let ratio = if u_sup == 0.0 {
        0.0
    } else {
        u_sup / (diameter * f_norm)
    };
    Ok(AbpReport {
        u_sup,
        f_norm,
        diameter,
        ratio,
        finite: ratio.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::math;

    #[test]
    fn affine_data_is_reproduced() {
        let grid = Arc::new(Grid::new(ConvexDomain::ellipse(1.0, 0.7).unwrap(), 0.05).unwrap());
        let ell = |p: [f64; 2]| 0.3 + 2.0 * p[0] - p[1];
        let sol = solve_lma(
            &CofactorField::identity(grid.clone()),
            &ScalarField::zeros(grid.clone()),
            &BoundaryData::from_fn(grid.clone(), ell),
        )
        .unwrap();
        for &n in grid.active_nodes() {
            assert!((sol.u.values[n] - ell(grid.point(n))).abs() < 1e-11);
        }
    }

    #[test]
    fn radial_abp_ratio() {
        let grid = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), 1.0 / 64.0).unwrap());
        let sol = solve_lma(
            &CofactorField::identity(grid.clone()),
            &ScalarField::constant(grid.clone(), 1.0),
            &BoundaryData::zero(grid.clone()),
        )
        .unwrap();
        for &n in grid.active_nodes() {
            let exact = 0.25 * (math::norm_sq(grid.point(n)) - 1.0);
            assert!((sol.u.values[n] - exact).abs() < 5e-4);
        }
        let r = abp_check(&sol).unwrap();
        let oracle = 1.0 / (8.0 * core::f64::consts::PI.sqrt());
        assert!((r.ratio / oracle - 1.0).abs() < 0.02, "{} vs {oracle}", r.ratio);
    }
}
