//! Coverings by sections and the section maximal function.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Grid, Region, ScalarField, NEIGHBORS8};
use crate::ma::PotentialField;
use crate::section::{maximal_height, section_profile_with, section_with, SectionScratch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VitaliOptions {
    pub delta0: f64,
    /// Smallest core factor tried when coverage fails.
    pub delta_min: f64,
}

impl Default for VitaliOptions {
    fn default() -> Self {
        VitaliOptions {
            delta0: 0.1,
            delta_min: 0.0125,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedSection {
    pub center: usize,
    /// Maximal interior height at the center.
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringResult {
    pub delta0: f64,
    /// Selections in greedy order.
    pub selected: Vec<SelectedSection>,
    /// Measure of region nodes outside every half-height section.
    pub coverage_defect: f64,
    /// Cells claimed by more than one core.
    pub disjointness_violations: usize,
    /// Region nodes considered (interior nodes of the region).
    pub region_nodes: usize,
    pub halvings: usize,
}

/// Greedy Vitali selection: candidates in decreasing order of maximal
/// height, kept when their core `S(y, delta0 hbar)` misses every earlier
/// core. The core factor is halved until the half-height sections cover the
/// region or `delta_min` is reached.
pub fn vitali_cover(
    pot: &PotentialField,
    region: &[bool],
    opts: &VitaliOptions,
) -> Result<CoveringResult> {
    let grid = &pot.grid;
    grid.check_len(region.len())?;
    let mut nodes: Vec<(f64, usize)> = grid
        .interior_nodes()
        .filter(|&n| region[n])
        .map(|n| (maximal_height(pot, n).0, n))
        .filter(|e| e.0 > 0.0)
        .collect();
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    nodes.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut scratch = SectionScratch::new(grid);
    let mut delta = opts.delta0;
    let mut halvings = 0;
    loop {
        let mut owned = vec![false; grid.len()];
        let mut selected = Vec::new();
        for &(hbar, y) in &nodes {
            let core = section_with(pot, y, delta * hbar, &mut scratch)?;
            if core.cells.iter().any(|&c| owned[c]) {
                continue;
            }
            for &c in &core.cells {
                owned[c] = true;
            }
            selected.push(SelectedSection { center: y, hbar });
        }
        let mut covered = vec![false; grid.len()];
        for s in &selected {
            let sec = section_with(pot, s.center, 0.5 * s.hbar, &mut scratch)?;
            for &c in &sec.cells {
                covered[c] = true;
            }
        }
        let missing = nodes.iter().filter(|e| !covered[e.1]).count();
        if missing == 0 || delta * 0.5 < opts.delta_min {
            let mut claims = vec![0u32; grid.len()];
            for s in &selected {
                let core = section_with(pot, s.center, delta * s.hbar, &mut scratch)?;
                for &c in &core.cells {
                    claims[c] += 1;
                }
            }
            let violations = claims.iter().filter(|&&k| k > 1).count();
            return Ok(CoveringResult {
                delta0: delta,
                selected,
                coverage_defect: missing as f64 * grid.cell_area(),
                disjointness_violations: violations,
                region_nodes: nodes.len(),
                halvings,
            });
        }
        delta *= 0.5;
        halvings += 1;
    }
}

/// Smallest height whose section around `x` has at least `min_cells` cells
/// and a fraction of `set` within `[lo, hi]`, searched up to `t_max`.
pub fn density_height(
    pot: &PotentialField,
    set: &[bool],
    x: usize,
    band: (f64, f64),
    t_max: f64,
    min_cells: usize,
    scratch: &mut SectionScratch,
) -> Option<f64> {
    let prof = section_profile_with(pot, x, t_max, scratch);
    let mut inside = 0usize;
    for (k, &(_, n)) in prof.iter().enumerate() {
        if set[n] {
            inside += 1;
        }
        let count = k + 1;
        // S(x, t) with t just above this key holds the first `count` entries,
        // unless the next key ties with this one
        if count < min_cells || prof.get(count).is_some_and(|e| e.0 == prof[k].0) {
            continue;
        }
        let ratio = inside as f64 / count as f64;
        if ratio >= band.0 && ratio <= band.1 {
            let t = match prof.get(count) {
                Some(next) => 0.5 * (prof[k].0 + next.0),
                None => 0.5 * (prof[k].0 + t_max),
            };
            return Some(t);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSelection {
    pub eps: f64,
    /// Selected `(center, t)` pairs in greedy order.
    pub selected: Vec<(usize, f64)>,
    /// Points of `O` whose density was outside the band, with the measured
    /// density.
    pub excluded: Vec<(usize, f64)>,
    pub o_measure: f64,
    pub union_measure: f64,
    /// Two layers of boundary cells of the union.
    pub slack: f64,
    /// Points of `O` outside the union.
    pub uncovered: usize,
    /// `|O| <= sqrt(eps) |union| + slack`.
    pub bound_holds: bool,
    /// `|O| <= sqrt(eps) |union|` without slack.
    pub bound_holds_strict: bool,
}

/// Select sections of decreasing height until every admissible point of `O`
/// lies in a selected section, then check `|O| <= sqrt(eps) |union|`.
pub fn covering_select(
    pot: &PotentialField,
    o: &[bool],
    eps: f64,
    heights: &[(usize, f64)],
) -> Result<CoveringSelection> {
    let grid = &pot.grid;
    grid.check_len(o.len())?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {eps}"
        )));
    }
    if !o.iter().any(|&b| b) {
        return Err(Error::EmptyRegion);
    }
    let mut scratch = SectionScratch::new(grid);
    let mut valid = Vec::new();
    let mut excluded = Vec::new();
    for &(x, t) in heights {
        let s = section_with(pot, x, t, &mut scratch)?;
        let k = s.cells.iter().filter(|&&c| o[c]).count();
        let density = k as f64 / s.len() as f64;
        if density >= 0.9 * eps && density <= 1.1 * eps {
            valid.push((x, t));
        } else {
            excluded.push((x, density));
        }
    }
    valid.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut union = vec![false; grid.len()];
    let mut selected = Vec::new();
    for &(x, t) in &valid {
        if union[x] {
            continue;
        }
        let s = section_with(pot, x, t, &mut scratch)?;
        for &c in &s.cells {
            union[c] = true;
        }
        selected.push((x, t));
    }
    let cell = grid.cell_area();
    let o_count = o.iter().filter(|&&b| b).count();
    let u_count = union.iter().filter(|&&b| b).count();
    let uncovered = o.iter().zip(&union).filter(|(a, b)| **a && !**b).count();
    let slack = 2.0 * boundary_layer(grid, &union) as f64 * cell;
    let o_measure = o_count as f64 * cell;
    let union_measure = u_count as f64 * cell;
    Ok(CoveringSelection {
        eps,
        selected,
        excluded,
        o_measure,
        union_measure,
        slack,
        uncovered,
        bound_holds: o_measure <= eps.sqrt() * union_measure + slack,
        bound_holds_strict: o_measure <= eps.sqrt() * union_measure,
    })
}

/// Cells of the mask with a neighbor outside it.
fn boundary_layer(grid: &Grid, mask: &[bool]) -> usize {
    (0..grid.len())
        .filter(|&n| {
            mask[n]
                && NEIGHBORS8
                    .iter()
                    .any(|&(di, dj)| grid.neighbor(n, di, dj).map_or(true, |m| !mask[m]))
        })
        .count()
}

pub const MAXIMAL_HEIGHTS: usize = 12;
pub const MAXIMAL_MIN_CELLS: usize = 8;

/// Log-spaced heights from `t_min` to `c_cap`.
pub fn height_grid(t_min: f64, c_cap: f64, count: usize) -> Vec<f64> {
    if !(t_min < c_cap) || count < 2 {
        return vec![c_cap];
    }
    let (a, b) = (t_min.ln(), c_cap.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Section maximal function over a finite grid of heights: at each node the
/// largest average of `|f|` over `S(x, t)` for `MAXIMAL_HEIGHTS` log-spaced
/// `t` in `[t_min, c_cap]`, where `t_min` is the least height whose section
/// has `MAXIMAL_MIN_CELLS` cells.
pub fn maximal_function(pot: &PotentialField, f: &ScalarField, c_cap: f64) -> Result<ScalarField> {
    let grid = &pot.grid;
    crate::grid::same_grid(grid, &f.grid)?;
    if !(c_cap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "height cap must be positive, got {c_cap}"
        )));
    }
    let mut scratch = SectionScratch::new(grid);
    let mut out = ScalarField::zeros(grid.clone());
    for &x in grid.active_nodes() {
        out.values[x] = maximal_value(pot, &f.values, x, c_cap, &mut scratch);
    }
    Ok(out)
}

/// Largest section average of `|f|` at node `x`, together with the audit
/// trail of `(t, average)` pairs.
pub fn maximal_audit(pot: &PotentialField, f: &ScalarField, x: usize, c_cap: f64) -> Vec<(f64, f64)> {
    let mut scratch = SectionScratch::new(&pot.grid);
    let prof = section_profile_with(pot, x, c_cap, &mut scratch);
    let heights = profile_heights(&prof, c_cap);
    let mut sums = Vec::with_capacity(prof.len() + 1);
    sums.push(0.0);
    for &(_, n) in &prof {
        sums.push(sums.last().unwrap() + f.values[n].abs());
    }
    heights
        .into_iter()
        .map(|t| {
            let k = prof.partition_point(|e| e.0 < t).max(1);
            (t, sums[k] / k as f64)
        })
        .collect()
}

fn profile_heights(prof: &[(f64, usize)], c_cap: f64) -> Vec<f64> {
    let t_min = if prof.len() >= MAXIMAL_MIN_CELLS {
        let key = prof[MAXIMAL_MIN_CELLS - 1].0;
        // smallest height strictly above the eighth key
        let next = prof[MAXIMAL_MIN_CELLS..]
            .iter()
            .map(|e| e.0)
            .find(|&k| k > key)
            .unwrap_or(c_cap);
        0.5 * (key + next)
    } else {
        c_cap
    };
    height_grid(t_min.min(c_cap), c_cap, MAXIMAL_HEIGHTS)
}

/// Maximal function at a single node; `f` holds one value per grid node.
pub fn maximal_value(
    pot: &PotentialField,
    f: &[f64],
    x: usize,
    c_cap: f64,
    scratch: &mut SectionScratch,
) -> f64 {
    let prof = section_profile_with(pot, x, c_cap, scratch);
    let mut prefix = Vec::with_capacity(prof.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &(_, n) in &prof {
        acc += f[n].abs();
        prefix.push(acc);
    }
    let mut best: f64 = 0.0;
    for t in profile_heights(&prof, c_cap) {
        let k = prof.partition_point(|e| e.0 < t).max(1);
        best = best.max(prefix[k] / k as f64);
    }
    best
}

/// `||M f||_p / ||f||_p` over the closed domain.
pub fn strong_type_ratio(pot: &PotentialField, f: &ScalarField, p: f64, c_cap: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "strong-type exponent must exceed 1, got {p}"
        )));
    }
    let fnorm = f.lp_norm(p, &Region::Domain)?;
    if fnorm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let m = maximal_function(pot, f, c_cap)?;
    Ok(m.lp_norm(p, &Region::Domain)? / fnorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::math;
    use alloc::sync::Arc;

    fn paraboloid(h: f64) -> PotentialField {
        let g = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), h).unwrap());
        PotentialField::from_fn(g, |p| 0.5 * math::norm_sq(p)).unwrap()
    }

    #[test]
    fn maximal_of_constant_is_one() {
        let pot = paraboloid(1.0 / 16.0);
        let one = ScalarField::constant(pot.grid.clone(), 1.0);
        let m = maximal_function(&pot, &one, 0.05).unwrap();
        for &n in pot.grid.active_nodes() {
            assert_eq!(m.values[n], 1.0);
        }
    }

    #[test]
    fn vitali_single_point() {
        let pot = paraboloid(1.0 / 16.0);
        let mut region = vec![false; pot.grid.len()];
        region[pot.grid.nearest_node([0.2, 0.1]).unwrap()] = true;
        let r = vitali_cover(&pot, &region, &VitaliOptions::default()).unwrap();
        assert_eq!(r.selected.len(), 1);
        assert_eq!(r.coverage_defect, 0.0);
    }

    #[test]
    fn height_grid_is_log_spaced() {
        let h = height_grid(0.001, 0.1, 3);
        assert!((h[1] - 0.01).abs() < 1e-14 && (h[2] - 0.1).abs() < 1e-14);
    }
}
