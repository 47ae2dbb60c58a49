//! Sections `S(x, t) = {y : phi(y) < phi(x) + grad phi(x).(y - x) + t}` and
//! the geometry built on them: maximal interior heights, boundary
//! localization, engulfing, volume growth, the interior/boundary dichotomy
//! and the two rescalings.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::AffineMap;
use crate::error::{Error, Result};
use crate::fit;
use crate::grid::{Grid, NodeKind, Region, ScalarField, NEIGHBORS8};
use crate::ma::PotentialField;
use crate::math::{self, Mat2, OrdF64, Point, Sym2};

/// `phi(y) - phi(x) - grad phi(x).(y - x)` for nodes `x`, `y`.
#[inline]
pub fn d2_nodes(pot: &PotentialField, x: usize, y: usize) -> f64 {
    let g = &pot.grid;
    let phi = &pot.phi.values;
    phi[y] - phi[x] - math::dot(pot.grad.values[x], math::sub(g.point(y), g.point(x)))
}

/// Quasi-distance squared from node `xbar` to an arbitrary point, with `phi`
/// interpolated bilinearly off the nodes.
pub fn quasi_distance(pot: &PotentialField, xbar: usize, x: Point) -> Result<f64> {
    let v = pot
        .eval(x)
        .ok_or(Error::OutsideDomain { x: x[0], y: x[1] })?;
    let p = pot.grid.point(xbar);
    Ok(v - pot.phi.values[xbar] - math::dot(pot.grad.values[xbar], math::sub(x, p)))
}

/// Principal-axis ellipse matched to the second moments of a cell set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidFit {
    pub center: Point,
    /// Semi-axes, larger first.
    pub semi_axes: [f64; 2],
    /// Angle of the major axis with the first coordinate axis.
    pub orientation: f64,
    /// Symmetric difference between cells and ellipse, relative to the
    /// number of cells.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub center: usize,
    pub center_point: Point,
    pub height: f64,
    /// Member nodes in ascending order.
    pub cells: Vec<usize>,
    pub measure: f64,
    pub centroid: Point,
    /// Some cell is boundary-adjacent.
    pub touches_boundary: bool,
    /// Only the center was found; the height is below grid resolution.
    pub degenerate: bool,
}

impl Section {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.cells.binary_search(&node).is_ok()
    }

    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        let mut m = vec![false; grid.len()];
        for &c in &self.cells {
            m[c] = true;
        }
        m
    }

    pub fn is_subset_of(&self, other: &Section) -> bool {
        let mut j = 0;
        for &c in &self.cells {
            while j < other.cells.len() && other.cells[j] < c {
                j += 1;
            }
            if j == other.cells.len() || other.cells[j] != c {
                return false;
            }
        }
        true
    }

    pub fn ellipsoid_fit(&self, grid: &Grid) -> EllipsoidFit {
        fit_ellipsoid(grid, &self.cells)
    }
}

/// Reusable flood-fill buffers.
#[derive(Debug, Clone)]
pub struct SectionScratch {
    stamp: Vec<u32>,
    done: Vec<u32>,
    best: Vec<f64>,
    epoch: u32,
    stack: Vec<usize>,
}

impl SectionScratch {
    pub fn new(grid: &Grid) -> Self {
        SectionScratch {
            stamp: vec![0; grid.len()],
            done: vec![0; grid.len()],
            best: vec![0.0; grid.len()],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.done.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// Connected component containing `x` of `{y in closed domain : d^2 < t}`,
/// with eight-neighbor connectivity.
pub fn section(pot: &PotentialField, x: usize, t: f64) -> Result<Section> {
    let mut scratch = SectionScratch::new(&pot.grid);
    section_with(pot, x, t, &mut scratch)
}

pub fn section_with(
    pot: &PotentialField,
    x: usize,
    t: f64,
    scratch: &mut SectionScratch,
) -> Result<Section> {
    let grid = &pot.grid;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "section height must be positive, got {t}"
        )));
    }
    if !grid.is_active(x) {
        let p = grid.point(x);
        return Err(Error::OutsideDomain { x: p[0], y: p[1] });
    }
    let cells = flood(pot, x, scratch, |y| d2_nodes(pot, x, y) < t);
    Ok(build_section(grid, x, t, cells))
}

fn flood(
    pot: &PotentialField,
    start: usize,
    scratch: &mut SectionScratch,
    inside: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let grid = &pot.grid;
    let e = scratch.next_epoch();
    let mut cells = Vec::new();
    scratch.stack.clear();
    scratch.stack.push(start);
    scratch.stamp[start] = e;
    while let Some(n) = scratch.stack.pop() {
        cells.push(n);
        for &(di, dj) in &NEIGHBORS8 {
            let Some(m) = grid.neighbor(n, di, dj) else {
                continue;
            };
            if scratch.stamp[m] == e || !grid.is_active(m) {
                continue;
            }
            scratch.stamp[m] = e;
            if inside(m) {
                scratch.stack.push(m);
            }
        }
    }
    cells.sort_unstable();
    cells
}

fn build_section(grid: &Grid, x: usize, t: f64, cells: Vec<usize>) -> Section {
    let mut c = [0.0, 0.0];
    let mut touches = false;
    for &n in &cells {
        c = math::add(c, grid.point(n));
        touches |= grid.kind(n) == NodeKind::BoundaryAdjacent;
    }
    let k = cells.len();
    Section {
        center: x,
        center_point: grid.point(x),
        height: t,
        measure: k as f64 * grid.cell_area(),
        centroid: math::scale(c, 1.0 / k as f64),
        touches_boundary: touches,
        degenerate: k <= 1,
        cells,
    }
}

/// Nodes of the connected sub-level component ordered by the height at
/// which they join the section centered at `x`, up to `t_max`. Entry
/// `(key, node)` belongs to `S(x, t)` exactly when `key < t`.
pub fn section_profile(pot: &PotentialField, x: usize, t_max: f64) -> Vec<(f64, usize)> {
    let mut scratch = SectionScratch::new(&pot.grid);
    section_profile_with(pot, x, t_max, &mut scratch)
}

pub fn section_profile_with(
    pot: &PotentialField,
    x: usize,
    t_max: f64,
    scratch: &mut SectionScratch,
) -> Vec<(f64, usize)> {
    let grid = &pot.grid;
    let e = scratch.next_epoch();
    let mut heap = BinaryHeap::new();
    let mut out = Vec::new();
    heap.push(Reverse((OrdF64(0.0), x)));
    scratch.stamp[x] = e;
    scratch.best[x] = 0.0;
    while let Some(Reverse((OrdF64(key), n))) = heap.pop() {
        if scratch.done[n] == e {
            continue;
        }
        scratch.done[n] = e;
        out.push((key, n));
        for &(di, dj) in &NEIGHBORS8 {
            let Some(m) = grid.neighbor(n, di, dj) else {
                continue;
            };
            if !grid.is_active(m) || scratch.done[m] == e {
                continue;
            }
            let k = key.max(d2_nodes(pot, x, m));
            if k >= t_max {
                continue;
            }
            if scratch.stamp[m] != e || k < scratch.best[m] {
                scratch.stamp[m] = e;
                scratch.best[m] = k;
                heap.push(Reverse((OrdF64(k), m)));
            }
        }
    }
    out
}

/// Maximal interior height of the section at `x` and the boundary sample
/// point where it is attained: the minimum over boundary samples `z` of
/// `phi(z) - phi(x) - grad phi(x).(z - x)`.
pub fn maximal_height(pot: &PotentialField, x: usize) -> (f64, Point) {
    let p = pot.grid.point(x);
    let phi_x = pot.phi.values[x];
    let gx = pot.grad.values[x];
    let mut best = (f64::INFINITY, p);
    for (z, v) in pot.boundary_samples() {
        let d = v - phi_x - math::dot(gx, math::sub(z, p));
        if d < best.0 {
            best = (d, z);
        }
    }
    (best.0.max(0.0), best.1)
}

/// Maximal heights at every interior node (zero elsewhere).
pub fn maximal_heights(pot: &PotentialField) -> Vec<f64> {
    let mut out = vec![0.0; pot.grid.len()];
    for n in pot.grid.interior_nodes() {
        out[n] = maximal_height(pot, n).0;
    }
    out
}

/// Default cap on section heights: a fixed fraction of the largest maximal
/// interior height.
pub fn default_c_cap(pot: &PotentialField) -> f64 {
    0.05 * maximal_heights(pot).into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSectionReport {
    /// Largest `k0` with `k0 hbar^{1/2} <= dist <= hbar^{1/2} / k0`.
    pub k0: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Measure the comparability of `dist(x, boundary)` and `hbar(x)^{1/2}`.
pub fn tangent_section_constant(pot: &PotentialField, nodes: &[usize]) -> Result<TangentSectionReport> {
    let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0);
    for &n in nodes {
        let (h, _) = maximal_height(pot, n);
        if !(h > 0.0) {
            continue;
        }
        let d = pot.grid.domain.distance_to_boundary(pot.grid.point(n));
        let r = d / h.sqrt();
        lo = lo.min(r);
        hi = hi.max(r);
        count += 1;
    }
    if count == 0 {
        return Err(Error::TooFewSamples {
            valid: 0,
            required: 1,
        });
    }
    Ok(TangentSectionReport {
        k0: lo.min(1.0 / hi),
        min_ratio: lo,
        max_ratio: hi,
        samples: count,
    })
}

pub fn fit_ellipsoid(grid: &Grid, cells: &[usize]) -> EllipsoidFit {
    let k = cells.len().max(1) as f64;
    let mut c = [0.0, 0.0];
    for &n in cells {
        c = math::add(c, grid.point(n));
    }
    c = math::scale(c, 1.0 / k);
    let mut cov = Sym2::ZERO;
    for &n in cells {
        let d = math::sub(grid.point(n), c);
        cov = cov.add(&Sym2::new(d[0] * d[0], d[0] * d[1], d[1] * d[1]));
    }
    // a uniform ellipse with semi-axes a, b has second moments a^2/4, b^2/4;
    // the h^2/12 term removes the cell-sampling bias
    let bias = grid.spacing * grid.spacing / 12.0;
    cov = cov.scaled(1.0 / k);
    let (l_min, l_max) = cov.eigenvalues();
    let a = 2.0 * (l_max + bias).max(0.0).sqrt();
    let b = 2.0 * (l_min + bias).max(0.0).sqrt();
    let orientation = 0.5 * (2.0 * cov.xy).atan2(cov.xx - cov.yy);
    let (cs, sn) = (orientation.cos(), orientation.sin());
    let inside = |p: Point| {
        let d = math::sub(p, c);
        let u = cs * d[0] + sn * d[1];
        let v = -sn * d[0] + cs * d[1];
        a > 0.0 && b > 0.0 && (u / a).powi(2) + (v / b).powi(2) <= 1.0
    };
    let member: alloc::collections::BTreeSet<usize> = cells.iter().copied().collect();
    let mut mismatch = cells.iter().filter(|&&n| !inside(grid.point(n))).count();
    let r = a.max(b) + 2.0 * grid.spacing;
    for &n in grid.active_nodes() {
        let p = grid.point(n);
        if math::dist(p, c) <= r && inside(p) && !member.contains(&n) {
            mismatch += 1;
        }
    }
    EllipsoidFit {
        center: c,
        semi_axes: [a, b],
        orientation,
        residual: mismatch as f64 / k,
    }
}

/// Local frame at a boundary node: rotation taking the inward normal to
/// `e_2` and the tangent plane of `phi` at the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub anchor: usize,
    pub origin: Point,
    pub normal: Point,
    pub rotation: Mat2,
    pub value: f64,
    pub gradient: Point,
}

impl BoundaryFrame {
    /// Frame at the boundary-adjacent node nearest to `z`.
    pub fn nearest(pot: &PotentialField, z: Point) -> Result<Self> {
        let g = &pot.grid;
        let node = g
            .boundary_nodes()
            .iter()
            .copied()
            .min_by(|&a, &b| {
                math::dist_sq(g.point(a), z).total_cmp(&math::dist_sq(g.point(b), z))
            })
            .ok_or(Error::EmptyRegion)?;
        Ok(Self::at_node(pot, node))
    }

    pub fn at_node(pot: &PotentialField, node: usize) -> Self {
        let g = &pot.grid;
        let origin = g.point(node);
        let foot = g.domain.project(origin);
        let normal = g.domain.inward_normal(foot);
        BoundaryFrame {
            anchor: node,
            origin,
            normal,
            rotation: Mat2::frame_from_normal(normal),
            value: pot.phi.values[node],
            gradient: pot.grad.values[node],
        }
    }

    pub fn to_local(&self, x: Point) -> Point {
        self.rotation.apply(math::sub(x, self.origin))
    }

    pub fn to_global(&self, y: Point) -> Point {
        math::add(self.rotation.transpose().apply(y), self.origin)
    }

    /// `phi` minus its tangent plane at the anchor, at node `n`.
    pub fn normalized(&self, pot: &PotentialField, n: usize) -> f64 {
        let x = pot.grid.point(n);
        pot.phi.values[n] - self.value - math::dot(self.gradient, math::sub(x, self.origin))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationFit {
    pub frame: BoundaryFrame,
    pub height: f64,
    /// Sliding parameter of `A_h y = (y_1 - tau y_2, y_2)` in the local frame.
    pub tau: f64,
    pub map: Mat2,
    /// Largest `k` with `k E_h` intersected with the domain inside the
    /// section, where `E_h = A_h^{-1} B_{h^{1/2}}`.
    pub k_inner: f64,
    /// Smallest `k` with the section inside `k E_h`.
    pub k_outer: f64,
    pub section: Section,
}

pub const MIN_LOCALIZATION_CELLS: usize = 8;

/// Fit the boundary section `S(z, h)` by a sheared half-ball.
pub fn localization_fit(pot: &PotentialField, frame: &BoundaryFrame, h: f64) -> Result<LocalizationFit> {
    let sec = section(pot, frame.anchor, h)?;
    if sec.len() < MIN_LOCALIZATION_CELLS {
        return Err(Error::SectionTooSmall {
            center: frame.anchor,
            height: h,
            cells: sec.len(),
            required: MIN_LOCALIZATION_CELLS,
        });
    }
    let g = &pot.grid;
    let (mut s12, mut s22) = (0.0, 0.0);
    for &n in &sec.cells {
        let y = frame.to_local(g.point(n));
        s12 += y[0] * y[1];
        s22 += y[1] * y[1];
    }
    let tau = if s22 > 0.0 { s12 / s22 } else { 0.0 };
    let map = Mat2::new(1.0, -tau, 0.0, 1.0);
    let sqrt_h = h.sqrt();
    let radius = |n: usize| math::norm(map.apply(frame.to_local(g.point(n)))) / sqrt_h;
    let k_outer = sec.cells.iter().map(|&n| radius(n)).fold(0.0, f64::max);
    let mask = sec.mask(g);
    let k_inner = g
        .active_nodes()
        .iter()
        .filter(|&&n| !mask[n])
        .map(|&n| radius(n))
        .fold(f64::INFINITY, f64::min);
    Ok(LocalizationFit {
        frame: *frame,
        height: h,
        tau,
        map,
        k_inner,
        k_outer,
        section: sec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngulfingSample {
    pub x: usize,
    pub t: f64,
    pub y: usize,
    pub theta: f64,
}

/// Smallest `theta` with `S(x, t)` inside `S(y, theta t)` for each sample
/// `(x, t, y)` with `y` in `S(x, t)`; samples with `y` outside are skipped.
pub fn engulfing_constant(
    pot: &PotentialField,
    samples: &[(usize, f64, usize)],
) -> Result<(f64, Vec<EngulfingSample>)> {
    let mut scratch = SectionScratch::new(&pot.grid);
    let mut out = Vec::new();
    let mut sup: f64 = 0.0;
    for &(x, t, y) in samples {
        let s = section_with(pot, x, t, &mut scratch)?;
        if !s.contains(y) {
            continue;
        }
        let theta = s
            .cells
            .iter()
            .map(|&z| d2_nodes(pot, y, z))
            .fold(0.0, f64::max)
            / t;
        sup = sup.max(theta);
        out.push(EngulfingSample { x, t, y, theta });
    }
    Ok((sup, out))
}

/// Engulfing samples: for each center and height, the cells of the section
/// farthest from the center in quasi-distance.
pub fn engulfing_samples(
    pot: &PotentialField,
    centers: &[usize],
    heights: &[f64],
) -> Result<Vec<(usize, f64, usize)>> {
    let mut scratch = SectionScratch::new(&pot.grid);
    let mut out = Vec::new();
    for &x in centers {
        for &t in heights {
            let s = section_with(pot, x, t, &mut scratch)?;
            if let Some(&y) = s
                .cells
                .iter()
                .max_by(|&&a, &&b| d2_nodes(pot, x, a).total_cmp(&d2_nodes(pot, x, b)))
            {
                out.push((x, t, y));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeFit {
    /// Slope of `log |S|` against `log t`.
    pub slope: f64,
    /// `min |S| / t^{n/2}`.
    pub c1: f64,
    /// `max |S| / t^{n/2}`.
    pub c2: f64,
    pub samples: usize,
}

pub const MIN_VOLUME_CELLS: usize = 20;
pub const MIN_VOLUME_SAMPLES: usize = 4;

pub fn volume_scaling(pot: &PotentialField, samples: &[(usize, f64)]) -> Result<VolumeFit> {
    let mut scratch = SectionScratch::new(&pot.grid);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    let half_n = crate::DIM as f64 / 2.0;
    for &(x, t) in samples {
        let s = section_with(pot, x, t, &mut scratch)?;
        if s.len() < MIN_VOLUME_CELLS {
            continue;
        }
        xs.push(t.ln());
        ys.push(s.measure.ln());
        let c = s.measure / t.powf(half_n);
        c1 = c1.min(c);
        c2 = c2.max(c);
    }
    if xs.len() < MIN_VOLUME_SAMPLES {
        return Err(Error::TooFewSamples {
            valid: xs.len(),
            required: MIN_VOLUME_SAMPLES,
        });
    }
    let line = fit::least_squares(&xs, &ys, None)?;
    Ok(VolumeFit {
        slope: line.slope,
        c1,
        c2,
        samples: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dichotomy {
    /// `S(x, 2t)` has no boundary-adjacent cell.
    Interior,
    /// `S(x, 2t)` reaches the boundary band; `z` is its band cell of least
    /// quasi-distance and `S(x, 2t)` lies in `S(z, c_bar t)` for any height
    /// factor above `c_bar`.
    BoundaryDominated { z: usize, z_point: Point, c_bar: f64 },
}

pub fn dichotomy_classify(pot: &PotentialField, x: usize, t: f64) -> Result<Dichotomy> {
    let s2 = section(pot, x, 2.0 * t)?;
    let g = &pot.grid;
    let z = s2
        .cells
        .iter()
        .copied()
        .filter(|&n| g.kind(n) == NodeKind::BoundaryAdjacent)
        .min_by(|&a, &b| d2_nodes(pot, x, a).total_cmp(&d2_nodes(pot, x, b)));
    let Some(z) = z else {
        return Ok(Dichotomy::Interior);
    };
    let c_bar = s2
        .cells
        .iter()
        .map(|&w| d2_nodes(pot, z, w))
        .fold(0.0, f64::max)
        / t;
    Ok(Dichotomy::BoundaryDominated {
        z,
        z_point: g.point(z),
        c_bar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleMode {
    /// `u_h = u o T^{-1}`, `f_h = h f o T^{-1}`.
    LInfinity,
    /// `u_h = u o T^{-1} / h`, `f_h = f o T^{-1}`.
    W2Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// Boundary node with its localization fit.
    Boundary(usize),
    /// Interior node; the map comes from the second moments of its maximal
    /// interior section.
    Interior(usize),
}

/// Result of `T(x) = h^{-1/2} A_h R (x - x_0)` applied to the domain and the
/// fields.
#[derive(Debug, Clone)]
pub struct RescaledTriple {
    pub h: f64,
    /// Volume-preserving part `A_h R`.
    pub map: Mat2,
    pub origin: Point,
    pub grid: Arc<Grid>,
    pub phi: PotentialField,
    pub u: ScalarField,
    pub f: ScalarField,
    /// Measured `k` with `B_k` intersected with the rescaled domain inside
    /// `U_h = S(0, 1)` and `U_h` inside `B_{1/k}`.
    pub k: f64,
    pub map_norm: f64,
    pub inverse_norm: f64,
}

impl RescaledTriple {
    pub fn to_rescaled(&self, x: Point) -> Point {
        math::scale(self.map.apply(math::sub(x, self.origin)), 1.0 / self.h.sqrt())
    }

    pub fn to_original(&self, z: Point) -> Point {
        let inv = self.map.inverse().expect("unimodular map");
        math::add(self.origin, inv.apply(math::scale(z, self.h.sqrt())))
    }
}

/// Rescale `phi`, `u` and `f` around the anchor at height `h`.
pub fn rescale(
    pot: &PotentialField,
    u: &ScalarField,
    f: &ScalarField,
    anchor: Anchor,
    h: f64,
    mode: RescaleMode,
) -> Result<RescaledTriple> {
    let g = &pot.grid;
    crate::grid::same_grid(g, &u.grid)?;
    crate::grid::same_grid(g, &f.grid)?;
    let (map, origin, value, gradient) = match anchor {
        Anchor::Boundary(node) => {
            if g.kind(node) != NodeKind::BoundaryAdjacent {
                return Err(Error::InvalidArgument(format!(
                    "boundary anchor {node} is not a boundary-adjacent node"
                )));
            }
            let frame = BoundaryFrame::at_node(pot, node);
            let fit = localization_fit(pot, &frame, h)?;
            (
                fit.map.mul(&frame.rotation),
                frame.origin,
                frame.value,
                frame.gradient,
            )
        }
        Anchor::Interior(node) => {
            if !g.is_interior(node) {
                return Err(Error::InvalidArgument(format!(
                    "interior anchor {node} is not an interior node"
                )));
            }
            let s = section(pot, node, h)?;
            if s.len() < MIN_LOCALIZATION_CELLS {
                return Err(Error::SectionTooSmall {
                    center: node,
                    height: h,
                    cells: s.len(),
                    required: MIN_LOCALIZATION_CELLS,
                });
            }
            (
                unimodular_from_moments(g, &s.cells, g.point(node)),
                g.point(node),
                pot.phi.values[node],
                pot.grad.values[node],
            )
        }
    };
    let sqrt_h = h.sqrt();
    let t_lin = map.scaled(1.0 / sqrt_h);
    let t_off = math::scale(t_lin.apply(origin), -1.0);
    let image = g.domain.affine_image(AffineMap {
        linear: t_lin,
        offset: t_off,
    })?;
    let new_grid = Arc::new(Grid::new(image, g.spacing / sqrt_h)?);
    let inv = map.inverse().ok_or_else(|| {
        Error::InvalidArgument("rescaling map is singular".into())
    })?;
    let back = |z: Point| math::add(origin, inv.apply(math::scale(z, sqrt_h)));
    let sample = |vals: &[f64], z: Point| -> f64 {
        let x = back(z);
        g.interpolate(vals, x)
            .or_else(|| g.nearest_active(x).map(|n| vals[n]))
            .unwrap_or(0.0)
    };
    let phi_vals = ScalarField::from_fn(new_grid.clone(), |z| {
        let x = back(z);
        (sample(&pot.phi.values, z) - value - math::dot(gradient, math::sub(x, origin))) / h
    })
    .values;
    let phi_h = PotentialField::from_values(new_grid.clone(), phi_vals)?;
    let (u_scale, f_scale) = match mode {
        RescaleMode::LInfinity => (1.0, h),
        RescaleMode::W2Infinity => (1.0 / h, 1.0),
    };
    let u_h = ScalarField::from_fn(new_grid.clone(), |z| u_scale * sample(&u.values, z));
    let f_h = ScalarField::from_fn(new_grid.clone(), |z| f_scale * sample(&f.values, z));

    // U_h = S(0, 1) of the rescaled potential, taken about the node at 0
    let zero = new_grid
        .nearest_active([0.0, 0.0])
        .ok_or(Error::EmptyRegion)?;
    let uh: Vec<bool> = {
        let mut scratch = SectionScratch::new(&new_grid);
        let cells = flood(&phi_h, zero, &mut scratch, |y| phi_h.phi.values[y] < 1.0);
        let mut m = vec![false; new_grid.len()];
        for c in cells {
            m[c] = true;
        }
        m
    };
    let mut k_in = f64::INFINITY;
    let mut k_out: f64 = 0.0;
    for &n in new_grid.active_nodes() {
        let r = math::norm(new_grid.point(n));
        if uh[n] {
            k_out = k_out.max(r);
        } else {
            k_in = k_in.min(r);
        }
    }
    Ok(RescaledTriple {
        h,
        map,
        origin,
        grid: new_grid,
        phi: phi_h,
        u: u_h,
        f: f_h,
        k: k_in.min(1.0 / k_out),
        map_norm: map.norm(),
        inverse_norm: inv.norm(),
    })
}

/// Determinant-one map sending the ellipse matched to the cells' second
/// moments about `center` to a disc.
fn unimodular_from_moments(grid: &Grid, cells: &[usize], center: Point) -> Mat2 {
    let mut cov = Sym2::ZERO;
    for &n in cells {
        let d = math::sub(grid.point(n), center);
        cov = cov.add(&Sym2::new(d[0] * d[0], d[0] * d[1], d[1] * d[1]));
    }
    let (l1, l2) = cov.eigenvalues();
    if !(l1 > 0.0) {
        return Mat2::IDENTITY;
    }
    // eigenvector of the larger eigenvalue
    let v = if cov.xy.abs() > 1e-300 {
        let w = [l2 - cov.yy, cov.xy];
        math::scale(w, 1.0 / math::norm(w))
    } else if cov.xx >= cov.yy {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let rot = Mat2::new(v[0], v[1], -v[1], v[0]);
    // scale the major axis down and the minor axis up, keeping det = 1
    let s = (l1 / l2).powf(0.25);
    Mat2::new(s, 0.0, 0.0, 1.0 / s).mul(&rot)
}

/// `(sup |u_h|, sup |u|)` for the L-infinity rescaling check.
pub fn sup_norms(triple: &RescaledTriple, u: &ScalarField) -> Result<(f64, f64)> {
    Ok((
        triple.u.lp_norm(f64::INFINITY, &Region::Domain)?,
        u.lp_norm(f64::INFINITY, &Region::Domain)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use core::f64::consts::PI;

    fn paraboloid(domain: ConvexDomain, h: f64) -> PotentialField {
        let g = Arc::new(Grid::new(domain, h).unwrap());
        PotentialField::from_fn(g, |p| 0.5 * math::norm_sq(p)).unwrap()
    }

    #[test]
    fn quasi_distance_of_paraboloid() {
        let pot = paraboloid(ConvexDomain::disc(1.5).unwrap(), 0.1);
        let o = pot.grid.nearest_node([0.0, 0.0]).unwrap();
        let d = quasi_distance(&pot, o, [0.6, 0.8]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximal_height_on_disc() {
        let g = Arc::new(Grid::new(ConvexDomain::disc(1.0).unwrap(), 1.0 / 64.0).unwrap());
        let pot = PotentialField::from_fn(g.clone(), |p| 0.5 * (math::norm_sq(p) - 1.0)).unwrap();
        let (h0, _) = maximal_height(&pot, g.nearest_node([0.0, 0.0]).unwrap());
        assert!((h0 / 0.5 - 1.0).abs() < 1e-3);
        let (h1, z) = maximal_height(&pot, g.nearest_node([0.5, 0.0]).unwrap());
        assert!((h1 / 0.125 - 1.0).abs() < 1e-3, "{h1}");
        assert!((z[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn section_is_disc() {
        let pot = paraboloid(ConvexDomain::square(1.5).unwrap(), 1.0 / 64.0);
        let o = pot.grid.nearest_node([0.0, 0.0]).unwrap();
        let s = section(&pot, o, 0.5).unwrap();
        assert!((s.measure / PI - 1.0).abs() < 0.02);
        let fit = s.ellipsoid_fit(&pot.grid);
        assert!((fit.semi_axes[0] - 1.0).abs() < 0.02 && (fit.semi_axes[1] - 1.0).abs() < 0.02);
        assert!(fit.residual < 0.05);
    }

    #[test]
    fn profile_agrees_with_flood_fill() {
        let g = Arc::new(Grid::new(ConvexDomain::ellipse(1.0, 0.6).unwrap(), 0.05).unwrap());
        let pot = PotentialField::from_fn(g.clone(), |p| {
            0.5 * math::norm_sq(p) + 0.3 * p[0] * p[1] + 0.1 * p[0].powi(4)
        })
        .unwrap();
        let x = g.nearest_node([0.3, 0.1]).unwrap();
        let prof = section_profile(&pot, x, 0.2);
        for t in [0.01, 0.05, 0.1, 0.19] {
            let s = section(&pot, x, t).unwrap();
            let mut from_profile: Vec<usize> =
                prof.iter().filter(|e| e.0 < t).map(|e| e.1).collect();
            from_profile.sort_unstable();
            assert_eq!(from_profile, s.cells);
        }
    }

    #[test]
    fn unimodular_map_has_unit_determinant() {
        let g = Grid::new(ConvexDomain::ellipse(1.0, 0.5).unwrap(), 0.05).unwrap();
        let cells: Vec<usize> = g.interior_nodes().collect();
        let m = unimodular_from_moments(&g, &cells, [0.0, 0.0]);
        assert!((m.det() - 1.0).abs() < 1e-12);
        // the ellipse becomes round: the image of the major axis is shortened
        assert!(m.apply([1.0, 0.0])[0].abs() < 1.0);
    }
}
