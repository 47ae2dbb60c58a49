//! Stability sweeps over the pinching parameter and the decay recursion.

use ma_lab_core::good_sets::{good_sets, quasi_ratios, GoodSetOptions, Neighborhood};
use ma_lab_core::iteration::{check_sequence, recursion_bounds, weighted_sum, weighted_sum_bound};
use ma_lab_core::lma::solve_lma;
use ma_lab_core::ma::certify_convexity;
use ma_lab_core::math::{self, Point, Sym2};
use ma_lab_core::section::{section, BoundaryFrame};
use ma_lab_core::{BoundaryData, CofactorField, PotentialField, Region, ScalarField};

use super::{max_of, new_report, par_map, strictly_decreasing};
use crate::config::{ExperimentConfig, G0Form};
use crate::error::{Context, LabError};
use crate::problems as pb;
use crate::report::{Assertion, ExperimentReport, Table};

/// Pinching values sorted from largest to smallest.
fn eps_sweep(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut e = cfg.sweep.eps.clone();
    e.sort_by(|a, b| b.total_cmp(a));
    e.dedup();
    e
}

/// `(spacing index, eps index)` for every sweep point.
fn grid_points(spacings: usize, eps: usize) -> Vec<(usize, usize)> {
    (0..spacings).flat_map(|i| (0..eps).map(move |j| (i, j))).collect()
}

fn slope_assertion(rep: &mut ExperimentReport, name: &str, eps: &[f64], values: &[f64]) {
    match pb::loglog_slope(eps, values) {
        Some(s) => {
            rep.slopes.insert(name.to_string(), s);
            rep.assert(Assertion::ge(format!("{name} log-log slope"), s, 0.0, 0.0));
        }
        None => rep.assert(Assertion::holds(format!("{name} log-log slope defined"), false)),
    }
}

pub fn cofactor_stability(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let eps = eps_sweep(cfg);
    let p = cfg.sweep.p;
    rep.sweep("eps", &eps);
    let companions = par_map(&cfg.spacings, |&h| {
        let grid = pb::grid(&cfg.domain, h)?;
        let w = pb::potential(cfg, &grid, 0.0, G0Form::Sin)?;
        let again = pb::potential(cfg, &grid, 0.0, G0Form::Sin)?;
        let wm = pb::cofactor_matrix(&w);
        let zero = pb::cofactor_matrix(&again).difference(&wm).context("cofactor difference")?;
        let zero = zero.lp_norm(p, &Region::Domain).context("norm")?;
        Ok((grid, wm, zero))
    })?;
    let points = grid_points(cfg.spacings.len(), eps.len());
    let norms = par_map(&points, |&(i, j)| {
        let (grid, wm, _) = &companions[i];
        let e = eps[j];
        let pinched = pb::potential(cfg, grid, e, cfg.density.g0)?;
        let constant = pb::potential(cfg, grid, e, G0Form::Constant)?;
        let d = pb::cofactor_matrix(&pinched).difference(wm).context("cofactor difference")?;
        let dc = pb::cofactor_matrix(&constant).difference(wm).context("cofactor difference")?;
        let oracle = ((1.0 + e).sqrt() - 1.0) * wm.lp_norm(p, &Region::Domain).context("norm")?;
        Ok((
            d.lp_norm(p, &Region::Domain).context("norm")?,
            dc.lp_norm(p, &Region::Domain).context("norm")?,
            oracle,
        ))
    })?;
    let mut t = Table::new("sweep", &["spacing", "eps", "norm", "constant_norm", "oracle"]);
    for (i, &h) in cfg.spacings.iter().enumerate() {
        let row = &norms[i * eps.len()..(i + 1) * eps.len()];
        let values: Vec<f64> = row.iter().map(|r| r.0).collect();
        for (j, r) in row.iter().enumerate() {
            t.push(vec![h, eps[j], r.0, r.1, r.2]);
            rep.assert(Assertion::eq(
                format!("constant density oracle at eps={} h={h}", eps[j]),
                r.1 / r.2,
                1.0,
                0.05,
            ));
            if let Some(k) = eps.iter().position(|&e| e == 2.0 * eps[j]) {
                rep.assert(Assertion::le(
                    format!("norm at eps={} below norm at eps={} h={h}", eps[j], eps[k]),
                    r.0,
                    row[k].0,
                    0.0,
                ));
            }
        }
        rep.assert(Assertion::eq(format!("eps = 0 gives zero at h={h}"), companions[i].2, 0.0, 0.0));
        rep.assert(Assertion::holds(
            format!("norms strictly decreasing at h={h}"),
            strictly_decreasing(&values),
        ));
        slope_assertion(&mut rep, &format!("cofactor h={h}"), &eps, &values);
        rep.quantity(&format!("norm_h{h}"), values);
    }
    rep.tables = vec![t];
    Ok(rep)
}

pub fn sobolev_stability(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let eps = eps_sweep(cfg);
    let gammas = cfg.sweep.gamma.clone();
    let h = cfg.spacing();
    rep.sweep("eps", &eps);
    let grid = pb::grid(&cfg.domain, h)?;
    let w = pb::potential(cfg, &grid, 0.0, G0Form::Sin)?;
    let runs = par_map(&eps, |&e| {
        let phi = pb::potential(cfg, &grid, e, cfg.density.g0)?;
        let constant = pb::potential(cfg, &grid, e, G0Form::Constant)?;
        let d = phi.hess.difference(&w.hess).context("Hessian difference")?;
        let dc = constant.hess.difference(&w.hess).context("Hessian difference")?;
        let g_l1 = phi.g.combine(1.0, &w.g, -1.0).context("density difference")?;
        let g_l1 = g_l1.lp_norm(1.0, &Region::Domain).context("norm")?;
        let mut lhs = Vec::new();
        let mut scaling = Vec::new();
        for &gamma in &gammas {
            lhs.push(d.lp_norm(gamma, &Region::Domain).context("norm")?);
            let oracle = ((1.0 + e).sqrt() - 1.0) * w.hess.lp_norm(gamma, &Region::Domain).context("norm")?;
            scaling.push(dc.lp_norm(gamma, &Region::Domain).context("norm")? / oracle);
        }
        Ok((g_l1, lhs, scaling))
    })?;
    let same = w.hess.difference(&w.hess).context("Hessian difference")?;
    rep.assert(Assertion::eq("g1 = g2 gives zero", same.lp_norm(1.0, &Region::Domain).context("norm")?, 0.0, 0.0));
    let mut cols = vec!["eps".to_string(), "g_l1".to_string()];
    cols.extend(gammas.iter().map(|g| format!("lhs_gamma{g}")));
    let mut t = Table {
        name: "sweep".to_string(),
        columns: cols,
        rows: Vec::new(),
    };
    for (e, (g_l1, lhs, scaling)) in eps.iter().zip(&runs) {
        let mut row = vec![*e, *g_l1];
        row.extend(lhs);
        t.push(row);
        for (gamma, s) in gammas.iter().zip(scaling) {
            rep.assert(Assertion::eq(format!("constant pair oracle at eps={e} gamma={gamma}"), *s, 1.0, 0.05));
        }
    }
    let g_l1: Vec<f64> = runs.iter().map(|r| r.0).collect();
    for (k, gamma) in gammas.iter().enumerate() {
        let lhs: Vec<f64> = runs.iter().map(|r| r.1[k]).collect();
        rep.assert(Assertion::holds(
            format!("LHS decreasing with eps for gamma={gamma}"),
            strictly_decreasing(&lhs),
        ));
        if let Some(s) = pb::loglog_slope(&g_l1, &lhs) {
            rep.slopes.insert(format!("lhs_vs_g_l1_gamma{gamma}"), s);
            rep.assert(Assertion::ge(format!("LHS vanishes with |g1 - g2| for gamma={gamma}"), s, 0.0, 0.0));
        }
        rep.quantity(&format!("lhs_gamma{gamma}"), lhs);
    }
    rep.quantity("g_l1", g_l1);
    rep.tables = vec![t];
    Ok(rep)
}

/// Smooth Dirichlet data for the approximation experiment.
fn approximation_data(p: Point) -> f64 {
    p[0].powi(3) - 3.0 * p[0] * p[1] * p[1] + 0.5 * p[0] * p[0]
}

pub fn approximation(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let eps = eps_sweep(cfg);
    rep.sweep("eps", &eps);
    let grid = pb::grid(&cfg.domain, cfg.spacing())?;
    let bd = BoundaryData::from_fn(grid.clone(), approximation_data);
    let zero = ScalarField::zeros(grid.clone());
    let w = pb::potential(cfg, &grid, 0.0, G0Form::Sin)?;
    let wc = w.cofactor();
    let wm = pb::cofactor_matrix(&w);
    let h_sol = solve_lma(&wc, &zero, &bd).context("companion solve")?;
    let (lo, hi) = grid.domain.bounding_box();
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let r_in = 0.25 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
    let inner: Vec<usize> = grid
        .active_nodes()
        .iter()
        .copied()
        .filter(|&n| math::dist(grid.point(n), center) <= r_in)
        .collect();
    let sup_diff = |a: &ScalarField, b: &ScalarField| max_of(inner.iter().map(|&n| (a.values[n] - b.values[n]).abs()));

    let runs = par_map(&eps, |&e| {
        let phi = pb::potential(cfg, &grid, e, cfg.density.g0)?;
        let u = solve_lma(&phi.cofactor(), &zero, &bd).context("pinched solve")?;
        let d = pb::cofactor_matrix(&phi).difference(&wm).context("cofactor difference")?;
        Ok((sup_diff(&u.u, &h_sol.u), d.lp_norm(2.0, &Region::Domain).context("norm")?))
    })?;
    let mut t = Table::new("sweep", &["eps", "sup_u_minus_h", "cofactor_l2"]);
    for (e, r) in eps.iter().zip(&runs) {
        t.push(vec![*e, r.0, r.1]);
    }
    let diffs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    rep.assert(Assertion::holds("sup |u - h| strictly decreasing", strictly_decreasing(&diffs)));
    slope_assertion(&mut rep, "sup |u - h|", &eps, &diffs);

    // eps = 0: identical operator and data
    let same = solve_lma(&wc, &zero, &bd).context("companion solve")?;
    let scale = max_of(inner.iter().map(|&n| h_sol.u.values[n].abs()));
    rep.assert(Assertion::le("eps = 0 gives h = u", sup_diff(&same.u, &h_sol.u), 0.0, 1e-10 * scale));

    let f = pb::smooth_rhs(&grid, cfg.sweep.seed);
    let uf = solve_lma(&wc, &f, &bd).context("forced solve")?;
    let ratio = sup_diff(&uf.u, &h_sol.u) / f.lp_norm(2.0, &Region::Domain).context("norm")?;
    rep.assert(Assertion::holds("forced constant finite", ratio.is_finite()));
    rep.quantity("forced_constant", vec![ratio]);
    rep.quantity("sup_u_minus_h", diffs);
    rep.quantity("cofactor_l2", runs.iter().map(|r| r.1).collect());
    rep.note(format!(
        "differences measured on the disc of radius {r_in} about the domain center; the companion uses the full domain"
    ));
    rep.tables = vec![t];
    Ok(rep)
}

pub fn convex_w21e(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let gammas = cfg.sweep.gamma.clone();
    rep.sweep("spacing", &cfg.spacings);
    let runs = par_map(&cfg.spacings, |&h| {
        let grid = pb::grid(&cfg.domain, h)?;
        let pot = pb::potential(cfg, &grid, cfg.density.eps, cfg.density.g0)?;
        let f = pot.g.scaled(2.0);
        let v = solve_lma(&pot.cofactor(), &f, &BoundaryData::zero(grid.clone())).context("LMA solve")?;
        let vp = PotentialField::from_values(grid.clone(), v.u.values.clone()).context("solution field")?;
        let convex = certify_convexity(&vp, cfg.solver.tol_convex_rel * pot.big_lambda);
        let dev = max_of(grid.active_nodes().iter().map(|&n| (v.u.values[n] - pot.phi.values[n]).abs()));
        let fmax = f.lp_norm(f64::INFINITY, &Region::Domain).context("norm")?;
        let mut ratios = Vec::new();
        let mut oracle = Vec::new();
        for &gamma in &gammas {
            ratios.push(vp.hess.lp_norm(gamma, &Region::Domain).context("norm")? / fmax);
            oracle.push(pot.hess.lp_norm(gamma, &Region::Domain).context("norm")? / (2.0 * pot.big_lambda));
        }
        let v0 = solve_lma(&pot.cofactor(), &ScalarField::zeros(grid.clone()), &BoundaryData::zero(grid.clone()))
            .context("LMA solve")?;
        let v0_sup = v0.u.lp_norm(f64::INFINITY, &Region::Domain).context("norm")?;
        Ok((convex.pass, dev, ratios, oracle, v0_sup))
    })?;
    let mut cols = vec!["spacing".to_string()];
    cols.extend(gammas.iter().map(|g| format!("ratio_gamma{g}")));
    let mut t = Table {
        name: "ratios".to_string(),
        columns: cols,
        rows: Vec::new(),
    };
    for (&h, (convex, dev, ratios, oracle, v0)) in cfg.spacings.iter().zip(&runs) {
        let mut row = vec![h];
        row.extend(ratios);
        t.push(row);
        if !convex {
            rep.note(format!("solution at h={h} is not certified convex; ratios not applicable"));
            continue;
        }
        rep.assert(Assertion::le(format!("v = phi at h={h}"), *dev, 0.0, 1e-6));
        for ((gamma, r), o) in gammas.iter().zip(ratios).zip(oracle) {
            rep.assert(Assertion::holds(format!("ratio finite gamma={gamma} h={h}"), r.is_finite()));
            rep.assert(Assertion::eq(format!("ratio matches phi gamma={gamma} h={h}"), r / o, 1.0, 1e-3));
        }
        rep.assert(Assertion::eq(format!("f = 0 gives v = 0 at h={h}"), *v0, 0.0, 0.0));
    }
    rep.note("f = 0 gives a degenerate 0/0 ratio; only v = 0 is checked");
    for w in runs.windows(2) {
        for (k, gamma) in gammas.iter().enumerate() {
            rep.assert(Assertion::le(
                format!("refinement spread gamma={gamma}"),
                pb::spread(w[0].2[k], w[1].2[k]),
                2.0,
                0.0,
            ));
        }
    }
    rep.tables = vec![t];
    Ok(rep)
}

/// Height of the boundary section used for contact-set defects.
const CONTACT_HEIGHT: f64 = 0.05;

/// `|S \ A_sigma| / |S|` over the interior cells of the boundary section.
fn contact_defect(pot: &PotentialField, sigmas: &[f64]) -> Result<Vec<f64>, LabError> {
    let grid = &pot.grid;
    let frame = BoundaryFrame::nearest(pot, grid.domain.boundary_point(0.0)).context("boundary frame")?;
    let s = section(pot, frame.anchor, CONTACT_HEIGHT).context("boundary section")?;
    let cells: Vec<usize> = s.cells.iter().copied().filter(|&c| grid.is_interior(c)).collect();
    if cells.is_empty() {
        return Err(LabError::Solver {
            context: "contact set".to_string(),
            source: ma_lab_core::Error::SectionTooSmall {
                center: frame.anchor,
                height: CONTACT_HEIGHT,
                cells: 0,
                required: 1,
            },
        });
    }
    let ratios = quasi_ratios(pot, Neighborhood::Full);
    Ok(sigmas
        .iter()
        .map(|&sigma| {
            let mask = ratios.mask(grid.len(), sigma);
            cells.iter().filter(|&&c| !mask[c]).count() as f64 / cells.len() as f64
        })
        .collect())
}

pub fn contact_set(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let eps = eps_sweep(cfg);
    let sigma = cfg.sweep.sigma;
    rep.sweep("eps", &eps);
    let points = grid_points(cfg.spacings.len(), eps.len());
    let defects = par_map(&points, |&(i, j)| {
        let grid = pb::grid(&cfg.domain, cfg.spacings[i])?;
        let pot = pb::potential(cfg, &grid, eps[j], cfg.density.g0)?;
        Ok(contact_defect(&pot, &[sigma])?[0])
    })?;
    let finest = cfg.spacings.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t = Table::new("sweep", &["spacing", "eps", "defect"]);
    for (i, &h) in cfg.spacings.iter().enumerate() {
        let row = &defects[i * eps.len()..(i + 1) * eps.len()];
        for (e, d) in eps.iter().zip(row) {
            t.push(vec![h, *e, *d]);
        }
        rep.assert(Assertion::holds(format!("defect decreasing with eps at h={h}"), strictly_decreasing(row)));
        if h == finest {
            rep.assert(Assertion::le(
                format!("defect at smallest eps at most half the largest, h={h}"),
                row[row.len() - 1],
                0.5 * row[0],
                0.0,
            ));
        } else {
            rep.note(format!(
                "h={h}: defect ratio smallest to largest eps is {:.3}; smallness is asserted at the finest spacing only",
                row[row.len() - 1] / row[0]
            ));
        }
        rep.quantity(&format!("defect_h{h}"), row.to_vec());
    }

    let grid = pb::grid(&cfg.domain, cfg.spacing())?;
    let c = grid.domain.bounding_box();
    let center = [0.5 * (c.0[0] + c.1[0]), 0.5 * (c.0[1] + c.1[1])];
    let paraboloid = PotentialField::from_fn(grid.clone(), |p| 0.5 * math::dist_sq(p, center)).context("paraboloid")?;
    let flat = contact_defect(&paraboloid, &[sigma.min(0.5)])?[0];
    rep.assert(Assertion::eq("paraboloid defect", flat, 0.0, 0.0));

    let scan = [0.3, 0.4, 0.45, sigma, 0.5, 0.6];
    let pot = pb::potential(cfg, &grid, eps[0], cfg.density.g0)?;
    let d = contact_defect(&pot, &scan)?;
    let mut st = Table::new("sigma_scan", &["sigma", "defect"]);
    for (s, v) in scan.iter().zip(&d) {
        st.push(vec![*s, *v]);
    }
    rep.note(format!(
        "defect at sigma = 0.6 and eps = {} is {:.3}",
        eps[0],
        d[d.len() - 1]
    ));
    rep.tables = vec![t, st];
    Ok(rep)
}

fn manufactured(p: Point) -> f64 {
    (2.0 * p[0]).sin() * p[1].cosh() + 0.25 * math::norm_sq(p).powi(2)
}

fn manufactured_hessian(p: Point) -> Sym2 {
    let (s, c) = ((2.0 * p[0]).sin(), (2.0 * p[0]).cos());
    Sym2::new(
        -4.0 * s * p[1].cosh() + 3.0 * p[0] * p[0] + p[1] * p[1],
        2.0 * c * p[1].sinh() + 2.0 * p[0] * p[1],
        s * p[1].cosh() + p[0] * p[0] + 3.0 * p[1] * p[1],
    )
}

/// `||D^2 u||_p / ||f||_q` for the LMA solution with zero boundary data.
fn w2p_ratio_of(cof: &CofactorField, f: &ScalarField, p: f64, q: f64) -> Result<f64, LabError> {
    let grid = cof.grid().clone();
    let u = solve_lma(cof, f, &BoundaryData::zero(grid)).context("LMA solve")?;
    let (_, hess) = u.u.derivatives();
    Ok(hess.lp_norm(p, &Region::Domain).context("norm")? / f.lp_norm(q, &Region::Domain).context("norm")?)
}

/// Small Lebesgue exponent of the far-from-flat regime.
const DELTA_EXPONENT: f64 = 0.25;
/// Pinching of the far-from-flat regime.
const FAR_EPS: f64 = 0.45;

pub fn w2p_ratio(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let eps = eps_sweep(cfg);
    let (p, q) = (cfg.sweep.p, cfg.sweep.q);
    if !(p > 1.0 && p < q && q > 2.0) {
        return Err(LabError::Usage(format!("need 1 < p < q and q > 2, got p = {p}, q = {q}")));
    }
    rep.sweep("eps", &eps);
    let points = grid_points(cfg.spacings.len(), eps.len());
    let ratios = par_map(&points, |&(i, j)| {
        let grid = pb::grid(&cfg.domain, cfg.spacings[i])?;
        let pot = pb::potential(cfg, &grid, eps[j], cfg.density.g0)?;
        let f = pb::smooth_rhs(&grid, cfg.sweep.seed);
        let cof = pot.cofactor();
        let r = w2p_ratio_of(&cof, &f, p, q)?;
        let scaled = if j == 0 { w2p_ratio_of(&cof, &f.scaled(10.0), p, q)? } else { r };
        Ok((r, scaled))
    })?;
    let mut t = Table::new("sweep", &["spacing", "eps", "ratio"]);
    let mut per_spacing = Vec::new();
    for (i, &h) in cfg.spacings.iter().enumerate() {
        let row: Vec<f64> = ratios[i * eps.len()..(i + 1) * eps.len()].iter().map(|r| r.0).collect();
        for (e, r) in eps.iter().zip(&row) {
            t.push(vec![h, *e, *r]);
        }
        let sup = max_of(row.iter().copied());
        rep.assert(Assertion::le(format!("sup R at most 3 median at h={h}"), sup, 3.0 * pb::median(&row), 0.0));
        let (r0, r10) = ratios[i * eps.len()];
        rep.assert(Assertion::eq(format!("R invariant under f -> 10 f at h={h}"), r10 / r0, 1.0, 1e-6));
        if let Some(s) = pb::loglog_slope(&eps, &row) {
            rep.slopes.insert(format!("ratio_vs_eps_h{h}"), s);
        }
        rep.quantity(&format!("ratio_h{h}"), row.clone());
        per_spacing.push(row);
    }
    for (k, w) in per_spacing.windows(2).enumerate() {
        for (j, e) in eps.iter().enumerate() {
            rep.assert(Assertion::le(
                format!("refinement spread at eps={e} h={} to h={}", cfg.spacings[k], cfg.spacings[k + 1]),
                pb::spread(w[0][j], w[1][j]),
                2.0,
                0.0,
            ));
        }
    }

    // flat operator against the closed-form solution
    let grid = pb::grid(&cfg.domain, cfg.spacing())?;
    let id = CofactorField::identity(grid.clone());
    let f = ScalarField::from_fn(grid.clone(), |x| manufactured_hessian(x).trace());
    let u = solve_lma(&id, &f, &BoundaryData::from_fn(grid.clone(), manufactured)).context("flat solve")?;
    let (_, hess) = u.u.derivatives();
    let discrete = hess.lp_norm(p, &Region::Domain).context("norm")?;
    let exact = ScalarField::from_fn(grid.clone(), |x| manufactured_hessian(x).frobenius());
    let exact = exact.lp_norm(p, &Region::Domain).context("norm")?;
    rep.assert(Assertion::eq("flat ratio matches closed form", discrete / exact, 1.0, 0.05));
    rep.quantity(
        "flat_ratio",
        vec![discrete / f.lp_norm(q, &Region::Domain).context("norm")?, exact / f.lp_norm(q, &Region::Domain).context("norm")?],
    );

    // small exponent with density bounds far from one
    let far = pb::potential(cfg, &grid, FAR_EPS, cfg.density.g0)?;
    let f = pb::smooth_rhs(&grid, cfg.sweep.seed);
    let rd = w2p_ratio_of(&far.cofactor(), &f, DELTA_EXPONENT, 2.0)?;
    rep.assert(Assertion::holds("small-exponent ratio finite", rd.is_finite() && rd > 0.0));
    rep.quantity("small_exponent_ratio", vec![rd]);
    rep.note(format!(
        "small-exponent regime: p = {DELTA_EXPONENT}, L^2 data, density in [{}, {}]",
        far.lambda, far.big_lambda
    ));
    rep.tables = vec![t];
    Ok(rep)
}

const MEASURED_TERMS: usize = 10;

pub fn geometric_iteration(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = new_report(cfg);
    let (eps0, mq) = (cfg.sweep.eps0, cfg.sweep.mq);
    let s = (2.0 * eps0).sqrt();

    let zero = [0.0; 6];
    let geo = recursion_bounds(1.0, &zero, eps0, 6).context("recursion bounds")?;
    let geometric = geo.iter().enumerate().all(|(k, v)| *v == s.powi(k as i32 + 1));
    rep.assert(Assertion::holds("zero forcing gives geometric bounds", geometric));

    let b = [0.1, 0.05, 0.02, 0.01, 0.005, 0.0025];
    let wb = weighted_sum_bound(0.3, &b, eps0, mq).context("weighted bound")?;
    if (wb.r - 0.5).abs() < 1e-12 {
        let direct = 0.3 / s + weighted_sum(&b, mq);
        rep.assert(Assertion::eq("closed form at r = 1/2", wb.closed_form, direct, 1e-12 * direct));
    }
    let bounds = recursion_bounds(0.3, &b, eps0, b.len()).context("recursion bounds")?;
    if mq >= 1.0 {
        rep.assert(Assertion::le("weighted sum of the bounds", weighted_sum(&bounds, mq), wb.closed_form, 1e-12));
    }

    let mut planted = vec![1.0];
    for k in 0..b.len() {
        let next = s * (planted[k] + b[k]);
        planted.push(next);
    }
    let ok = check_sequence(&planted, &b, eps0).context("planted check")?;
    rep.assert(Assertion::holds("recursion with equality accepted", ok.first_violation.is_none()));
    let mut bad = planted.clone();
    bad[2] *= 1.01;
    let flagged = check_sequence(&bad, &b, eps0).context("planted check")?;
    rep.assert(Assertion::eq(
        "violation flagged at k = 3",
        flagged.first_violation.map_or(0.0, |k| k as f64),
        3.0,
        0.0,
    ));

    // measured a_k = |Omega \ G_{M^k}| for a pinched LMA solution
    let grid = pb::grid(&cfg.domain, cfg.spacing())?;
    let pot = pb::potential(cfg, &grid, cfg.density.eps, cfg.density.g0)?;
    let f = pb::smooth_rhs(&grid, cfg.sweep.seed);
    let u = solve_lma(&pot.cofactor(), &f, &BoundaryData::zero(grid.clone())).context("LMA solve")?;
    let g = good_sets(&pot, &u.u, &GoodSetOptions::default()).context("good sets")?;
    // thresholds M^k o_min spanning the measured openings
    let omin = g.openings.iter().copied().fold(f64::INFINITY, f64::min);
    let omax = max_of(g.openings.iter().copied());
    let base = (omax / omin).powf(1.0 / MEASURED_TERMS as f64);
    let thresholds: Vec<f64> = (1..=MEASURED_TERMS).map(|k| omin * base.powi(k as i32)).collect();
    let a: Vec<f64> = thresholds.iter().map(|&m| g.complement_measure(m)).collect();
    rep.assert(Assertion::holds("measured a_k non-increasing", a.windows(2).all(|w| w[1] <= w[0])));
    let mq_measured = base.powf(cfg.sweep.q);
    let sum = weighted_sum(&a, mq_measured);
    rep.assert(Assertion::holds("measured weighted sum finite", sum.is_finite()));
    rep.quantity("measured_a", a.clone());
    rep.quantity("measured_weighted_sum", vec![sum]);
    rep.quantity("measured_base", vec![base]);

    let mut t = Table::new("recursion", &["k", "planted", "bound"]);
    for (k, bound) in ok.bounds.iter().enumerate() {
        t.push(vec![(k + 2) as f64, planted[k + 1], *bound]);
    }
    let mut mt = Table::new("measured", &["threshold", "a"]);
    for (m, v) in thresholds.iter().zip(&a) {
        mt.push(vec![*m, *v]);
    }
    rep.tables = vec![t, mt];
    Ok(rep)
}
