//! Uniform Cartesian discretization of a convex domain, per-node fields,
//! finite differences and discrete integral norms.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::math::{self, Point, Sym2};

/// Minimum number of interior nodes for a usable grid.
pub const MIN_INTERIOR_NODES: usize = 16;

/// Extra node layers added around the bounding box.
const MARGIN: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// In the closed domain with all eight neighbors in the closed domain.
    Interior,
    /// In the closed domain with at least one exterior neighbor.
    BoundaryAdjacent,
    Exterior,
}

/// How the Dirichlet condition is imposed at a boundary-adjacent node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryLink {
    /// The node lies on the boundary: `u_p = datum(point)`.
    OnBoundary { point: Point },
    /// Linear interpolation along a grid line through the crossing point
    /// `p + theta d`: `u_p = (theta u_inner + datum(crossing)) / (1 + theta)`
    /// where `inner = p - d`.
    Interpolated {
        crossing: Point,
        theta: f64,
        inner: usize,
    },
    /// No usable grid line: datum at the nearest boundary point.
    Projected { point: Point },
}

impl BoundaryLink {
    /// Boundary point where the datum is sampled.
    pub fn sample_point(&self) -> Point {
        match *self {
            BoundaryLink::OnBoundary { point } | BoundaryLink::Projected { point } => point,
            BoundaryLink::Interpolated { crossing, .. } => crossing,
        }
    }
}

/// Node subset used by norms and averages.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Interior,
    /// Interior and boundary-adjacent nodes.
    Domain,
    /// Explicit per-node mask.
    Mask(Vec<bool>),
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: ConvexDomain,
    pub spacing: f64,
    /// Coordinates of node `(0, 0)`.
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    kinds: Vec<NodeKind>,
    /// Non-exterior nodes in row-major order.
    active: Vec<usize>,
    /// Position of a node in `active`, `usize::MAX` for exterior nodes.
    active_index: Vec<usize>,
    boundary_nodes: Vec<usize>,
    boundary_index: Vec<usize>,
    links: Vec<BoundaryLink>,
    interior_count: usize,
}

pub const NEIGHBORS8: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

impl Grid {
    /// Discretize `domain` with the given spacing. The origin of the plane is
    /// always a node.
    pub fn new(domain: ConvexDomain, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let (lo, hi) = domain.bounding_box();
        let i0 = (lo[0] / spacing).floor() as i64 - MARGIN;
        let j0 = (lo[1] / spacing).floor() as i64 - MARGIN;
        let i1 = (hi[0] / spacing).ceil() as i64 + MARGIN;
        let j1 = (hi[1] / spacing).ceil() as i64 + MARGIN;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let origin = [i0 as f64 * spacing, j0 as f64 * spacing];
        let n = nx * ny;

        let mut inside = vec![false; n];
        for j in 0..ny {
            for i in 0..nx {
                let p = [
                    (i0 + i as i64) as f64 * spacing,
                    (j0 + j as i64) as f64 * spacing,
                ];
                inside[j * nx + i] = domain.contains(p);
            }
        }
        let mut kinds = vec![NodeKind::Exterior; n];
        let mut interior_count = 0;
        for j in 0..ny {
            for i in 0..nx {
                let id = j * nx + i;
                if !inside[id] {
                    continue;
                }
                let all = NEIGHBORS8.iter().all(|&(di, dj)| {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    a >= 0
                        && b >= 0
                        && (a as usize) < nx
                        && (b as usize) < ny
                        && inside[b as usize * nx + a as usize]
                });
                kinds[id] = if all {
                    interior_count += 1;
                    NodeKind::Interior
                } else {
                    NodeKind::BoundaryAdjacent
                };
            }
        }
        if interior_count < MIN_INTERIOR_NODES {
            return Err(Error::TooCoarse {
                spacing,
                interior: interior_count,
                required: MIN_INTERIOR_NODES,
            });
        }
        let mut grid = Grid {
            domain,
            spacing,
            origin,
            nx,
            ny,
            kinds,
            active: Vec::new(),
            active_index: vec![usize::MAX; n],
            boundary_nodes: Vec::new(),
            boundary_index: vec![usize::MAX; n],
            links: Vec::new(),
            interior_count,
        };
        for id in 0..n {
            if grid.kinds[id] != NodeKind::Exterior {
                grid.active_index[id] = grid.active.len();
                grid.active.push(id);
            }
            if grid.kinds[id] == NodeKind::BoundaryAdjacent {
                grid.boundary_index[id] = grid.boundary_nodes.len();
                grid.boundary_nodes.push(id);
            }
        }
        grid.links = grid
            .boundary_nodes
            .iter()
            .map(|&p| grid.build_link(p))
            .collect();
        Ok(grid)
    }

    fn build_link(&self, p: usize) -> BoundaryLink {
        let x = self.point(p);
        if self.domain.on_boundary(x) {
            return BoundaryLink::OnBoundary { point: x };
        }
        let mut best: Option<(f64, BoundaryLink)> = None;
        for &(di, dj) in &NEIGHBORS8 {
            let Some(out) = self.neighbor(p, di, dj) else {
                continue;
            };
            if self.kinds[out] != NodeKind::Exterior {
                continue;
            }
            let Some(inner) = self.neighbor(p, -di, -dj) else {
                continue;
            };
            if self.kinds[inner] == NodeKind::Exterior {
                continue;
            }
            let theta = self.domain.segment_crossing(x, self.point(out));
            let len = theta * ((di * di + dj * dj) as f64).sqrt();
            if best.as_ref().map_or(true, |(l, _)| len < *l) {
                let crossing = math::add(
                    x,
                    math::scale([di as f64 * self.spacing, dj as f64 * self.spacing], theta),
                );
                best = Some((
                    len,
                    BoundaryLink::Interpolated {
                        crossing,
                        theta,
                        inner,
                    },
                ));
            }
        }
        match best {
            Some((_, link)) => link,
            None => BoundaryLink::Projected {
                point: self.domain.project(x),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.kinds[node] != NodeKind::Exterior
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.kinds[node] == NodeKind::Interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    /// Interior and boundary-adjacent nodes, row-major.
    pub fn active_nodes(&self) -> &[usize] {
        &self.active
    }

    pub fn active_index(&self, node: usize) -> Option<usize> {
        let k = self.active_index[node];
        (k != usize::MAX).then_some(k)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .copied()
            .filter(move |&n| self.kinds[n] == NodeKind::Interior)
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_index(&self, node: usize) -> Option<usize> {
        let k = self.boundary_index[node];
        (k != usize::MAX).then_some(k)
    }

    /// Dirichlet links, parallel to [`Grid::boundary_nodes`].
    pub fn links(&self) -> &[BoundaryLink] {
        &self.links
    }

    /// Boundary points where Dirichlet data is sampled.
    pub fn boundary_samples(&self) -> Vec<Point> {
        self.links.iter().map(|l| l.sample_point()).collect()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn point(&self, node: usize) -> Point {
        let (i, j) = self.ij(node);
        [
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
        ]
    }

    pub fn neighbor(&self, node: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.ij(node);
        let a = i as i64 + di;
        let b = j as i64 + dj;
        if a < 0 || b < 0 || a as usize >= self.nx || b as usize >= self.ny {
            None
        } else {
            Some(b as usize * self.nx + a as usize)
        }
    }

    fn active_neighbor(&self, node: usize, di: i64, dj: i64) -> Option<usize> {
        self.neighbor(node, di, dj).filter(|&n| self.is_active(n))
    }

    /// Nearest node to `p` (any kind), if `p` is inside the grid box.
    pub fn nearest_node(&self, p: Point) -> Option<usize> {
        let i = ((p[0] - self.origin[0]) / self.spacing).round();
        let j = ((p[1] - self.origin[1]) / self.spacing).round();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        Some(self.node(i as usize, j as usize))
    }

    /// Nearest non-exterior node.
    pub fn nearest_active(&self, p: Point) -> Option<usize> {
        if let Some(n) = self.nearest_node(p) {
            if self.is_active(n) {
                return Some(n);
            }
        }
        self.active
            .iter()
            .copied()
            .min_by(|&a, &b| {
                math::dist_sq(self.point(a), p).total_cmp(&math::dist_sq(self.point(b), p))
            })
    }

    /// Bilinear interpolation of nodal values. Corners outside the closed
    /// domain are dropped and the remaining weights renormalized.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Option<f64> {
        let fx = (p[0] - self.origin[0]) / self.spacing;
        let fy = (p[1] - self.origin[1]) / self.spacing;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let j = (fy.floor() as usize).min(self.ny.saturating_sub(2));
        if i + 1 >= self.nx || j + 1 >= self.ny {
            return None;
        }
        let (sx, sy) = (fx - i as f64, fy - j as f64);
        if sx > 1.0 + 1e-9 || sy > 1.0 + 1e-9 {
            return None;
        }
        let corners = [
            (self.node(i, j), (1.0 - sx) * (1.0 - sy)),
            (self.node(i + 1, j), sx * (1.0 - sy)),
            (self.node(i, j + 1), (1.0 - sx) * sy),
            (self.node(i + 1, j + 1), sx * sy),
        ];
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (n, w) in corners {
            if self.is_active(n) && w > 0.0 {
                acc += w * values[n];
                wsum += w;
            }
        }
        if wsum <= 0.0 {
            // exactly on an exterior corner or a zero-weight configuration
            return corners
                .iter()
                .find(|(n, w)| self.is_active(*n) && *w >= 0.0 && {
                    let q = self.point(*n);
                    math::dist(q, p) < 1e-9 * self.spacing
                })
                .map(|(n, _)| values[*n]);
        }
        Some(acc / wsum)
    }

    pub fn region_mask(&self, region: &Region) -> Result<Vec<bool>> {
        let mask: Vec<bool> = match region {
            Region::Interior => self.kinds.iter().map(|k| *k == NodeKind::Interior).collect(),
            Region::Domain => self.kinds.iter().map(|k| *k != NodeKind::Exterior).collect(),
            Region::Mask(m) => {
                if m.len() != self.len() {
                    return Err(Error::GridMismatch {
                        expected: self.len(),
                        found: m.len(),
                    });
                }
                m.clone()
            }
        };
        if !mask.iter().any(|&b| b) {
            return Err(Error::EmptyRegion);
        }
        Ok(mask)
    }

    /// Measure of the region by cell counting.
    pub fn measure(&self, region: &Region) -> Result<f64> {
        let mask = self.region_mask(region)?;
        Ok(mask.iter().filter(|&&b| b).count() as f64 * self.cell_area())
    }

    /// Discrete `L^p` norm, the Riemann sum `(sum |v|^p h^2)^{1/p}`, or the
    /// maximum for `p = inf`. Exponents in `(0, 1)` give the quasi-norm.
    pub fn lp_norm(&self, values: &[f64], p: f64, region: &Region) -> Result<f64> {
        self.check_len(values.len())?;
        if !(p > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "norm exponent must be positive, got {p}"
            )));
        }
        let mask = self.region_mask(region)?;
        let it = values
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.abs());
        if p.is_infinite() {
            return Ok(it.fold(0.0, f64::max));
        }
        let s: f64 = if p == 1.0 {
            it.sum()
        } else if p == 2.0 {
            it.map(|v| v * v).sum()
        } else {
            it.map(|v| v.powf(p)).sum()
        };
        Ok((s * self.cell_area()).powf(1.0 / p))
    }

    /// Norm with respect to the normalized measure on the region.
    pub fn mean_lp_norm(&self, values: &[f64], p: f64, region: &Region) -> Result<f64> {
        let m = self.measure(region)?;
        let n = self.lp_norm(values, p, region)?;
        if p.is_infinite() {
            Ok(n)
        } else {
            Ok(n / m.powf(1.0 / p))
        }
    }

    pub fn check_len(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.len(),
                found,
            })
        }
    }

    /// Gradient and Hessian of nodal values at every non-exterior node:
    /// central differences where both neighbors are available, one-sided
    /// second-order stencils otherwise. Components without a usable stencil
    /// are extrapolated linearly from inner neighbors, which keeps them
    /// exact for quadratics. Exterior entries are zero.
    pub fn derivatives(&self, values: &[f64]) -> (Vec<Point>, Vec<Sym2>) {
        let n = self.len();
        // components: gx, gy, hxx, hxy, hyy
        let mut comp: Vec<[Option<f64>; 5]> = vec![[None; 5]; n];
        for &p in &self.active {
            let (gx, hxx) = self.axis_derivatives(values, p, 1, 0);
            let (gy, hyy) = self.axis_derivatives(values, p, 0, 1);
            comp[p] = [gx, gy, hxx, self.cross_derivative(values, p), hyy];
        }
        self.fill_missing(&mut comp);
        let mut grad = vec![[0.0; 2]; n];
        let mut hess = vec![Sym2::ZERO; n];
        for &p in &self.active {
            let c = comp[p].map(|v| v.unwrap_or(0.0));
            grad[p] = [c[0], c[1]];
            hess[p] = Sym2::new(c[2], c[3], c[4]);
        }
        (grad, hess)
    }

    fn fill_missing(&self, comp: &mut [[Option<f64>; 5]]) {
        for _ in 0..8 {
            let mut changed = false;
            let mut updates = Vec::new();
            for &p in &self.active {
                for c in 0..5 {
                    if comp[p][c].is_some() {
                        continue;
                    }
                    let (mut acc, mut cnt) = (0.0, 0usize);
                    for &(di, dj) in &NEIGHBORS8 {
                        let a = self.active_neighbor(p, di, dj).and_then(|a| comp[a][c]);
                        let b = self.active_neighbor(p, 2 * di, 2 * dj).and_then(|b| comp[b][c]);
                        if let (Some(a), Some(b)) = (a, b) {
                            acc += 2.0 * a - b;
                            cnt += 1;
                        }
                    }
                    if cnt == 0 {
                        for &(di, dj) in &NEIGHBORS8 {
                            if let Some(a) = self.active_neighbor(p, di, dj).and_then(|a| comp[a][c]) {
                                acc += a;
                                cnt += 1;
                            }
                        }
                    }
                    if cnt > 0 {
                        updates.push((p, c, acc / cnt as f64));
                    }
                }
            }
            for (p, c, v) in updates {
                comp[p][c] = Some(v);
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }

    /// Second-order central Hessian at an interior node.
    #[inline]
    pub fn central_hessian(&self, values: &[f64], p: usize) -> Sym2 {
        let nx = self.nx;
        let h2 = self.spacing * self.spacing;
        let c = values[p];
        let xx = (values[p + 1] - 2.0 * c + values[p - 1]) / h2;
        let yy = (values[p + nx] - 2.0 * c + values[p - nx]) / h2;
        let xy = (values[p + nx + 1] + values[p - nx - 1] - values[p - nx + 1] - values[p + nx - 1])
            / (4.0 * h2);
        Sym2::new(xx, xy, yy)
    }

    fn axis_derivatives(&self, v: &[f64], p: usize, di: i64, dj: i64) -> (Option<f64>, Option<f64>) {
        let h = self.spacing;
        let f0 = v[p];
        let fwd = self.active_neighbor(p, di, dj);
        let bwd = self.active_neighbor(p, -di, -dj);
        if let (Some(a), Some(b)) = (fwd, bwd) {
            return (
                Some((v[a] - v[b]) / (2.0 * h)),
                Some((v[a] - 2.0 * f0 + v[b]) / (h * h)),
            );
        }
        let sign = if fwd.is_some() { 1 } else { -1 };
        let chain: Vec<usize> = (1..=3)
            .map_while(|k| self.active_neighbor(p, sign * k * di, sign * k * dj))
            .collect();
        let s = sign as f64;
        match chain.len() {
            3 => {
                let (f1, f2, f3) = (v[chain[0]], v[chain[1]], v[chain[2]]);
                (
                    Some(s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)),
                    Some((2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h)),
                )
            }
            2 => {
                let (f1, f2) = (v[chain[0]], v[chain[1]]);
                (Some(s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)), None)
            }
            _ => (None, None),
        }
    }

    fn cross_derivative(&self, v: &[f64], p: usize) -> Option<f64> {
        let h2 = self.spacing * self.spacing;
        let f0 = v[p];
        let mut acc = 0.0;
        let mut count = 0;
        for (s, t) in [(1i64, 1i64), (-1, 1), (-1, -1), (1, -1)] {
            let (Some(a), Some(b), Some(c)) = (
                self.active_neighbor(p, s, t),
                self.active_neighbor(p, s, 0),
                self.active_neighbor(p, 0, t),
            ) else {
                continue;
            };
            acc += (v[a] - v[b] - v[c] + f0) / ((s * t) as f64 * h2);
            count += 1;
        }
        (count > 0).then(|| acc / count as f64)
    }
}

/// Per-node scalar values tied to a grid. Exterior entries are unused.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: Arc<Grid>,
    pub values: Vec<Point>,
}

/// Per-node symmetric matrices; only three entries are stored.
#[derive(Debug, Clone)]
pub struct MatrixField {
    pub grid: Arc<Grid>,
    pub values: Vec<Sym2>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        for &n in f.grid.clone().active_nodes() {
            f.values[n] = c;
        }
        f
    }

    /// Sample `f` at every non-exterior node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for &n in grid.active_nodes() {
            values[n] = f(grid.point(n));
        }
        ScalarField { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for &n in self.grid.active_nodes() {
            out.values[n] = f(self.values[n]);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `a * self + b * other` on active nodes.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let mut out = self.clone();
        for &n in self.grid.active_nodes() {
            out.values[n] = a * self.values[n] + b * other.values[n];
        }
        Ok(out)
    }

    pub fn lp_norm(&self, p: f64, region: &Region) -> Result<f64> {
        self.grid.lp_norm(&self.values, p, region)
    }

    pub fn derivatives(&self) -> (VectorField, MatrixField) {
        let (g, h) = self.grid.derivatives(&self.values);
        (
            VectorField {
                grid: self.grid.clone(),
                values: g,
            },
            MatrixField {
                grid: self.grid.clone(),
                values: h,
            },
        )
    }

    pub fn interpolate(&self, p: Point) -> Option<f64> {
        self.grid.interpolate(&self.values, p)
    }

    /// Minimum and maximum over the region.
    pub fn range(&self, region: &Region) -> Result<(f64, f64)> {
        let mask = self.grid.region_mask(region)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (v, m) in self.values.iter().zip(&mask) {
            if *m {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        Ok((lo, hi))
    }
}

impl MatrixField {
    /// Pointwise Frobenius norms as a scalar field.
    pub fn frobenius(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|m| m.frobenius()).collect(),
        }
    }

    pub fn difference(&self, other: &MatrixField) -> Result<MatrixField> {
        same_grid(&self.grid, &other.grid)?;
        Ok(MatrixField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    /// `L^p` norm of the pointwise Frobenius norm.
    pub fn lp_norm(&self, p: f64, region: &Region) -> Result<f64> {
        self.frobenius().lp_norm(p, region)
    }
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.len() == b.len() && a.spacing == b.spacing && a.origin == b.origin)
    {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            expected: a.len(),
            found: b.len(),
        })
    }
}

/// Dirichlet data sampled at the grid's boundary links.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub grid: Arc<Grid>,
    /// One value per boundary-adjacent node.
    pub values: Vec<f64>,
    /// When set, `values` are imposed directly as nodal values instead of
    /// being used through the links.
    pub nodal: bool,
}

impl BoundaryData {
    /// Evaluate a continuous datum at each link's boundary point.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Self {
        let values = grid.links().iter().map(|l| f(l.sample_point())).collect();
        BoundaryData {
            grid,
            values,
            nodal: false,
        }
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        Self::from_fn(grid, |_| 0.0)
    }

    /// Use the field's values at boundary-adjacent nodes as nodal Dirichlet
    /// values.
    pub fn from_nodal(field: &ScalarField) -> Self {
        let grid = field.grid.clone();
        let values = grid
            .boundary_nodes()
            .iter()
            .map(|&n| field.values[n])
            .collect();
        BoundaryData {
            grid,
            values,
            nodal: true,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Row of the Dirichlet condition at boundary slot `k`:
    /// `u_p - coef * u_inner = rhs`.
    pub fn row(&self, k: usize) -> (Option<(usize, f64)>, f64) {
        if self.nodal {
            return (None, self.values[k]);
        }
        match self.grid.links()[k] {
            BoundaryLink::Interpolated { theta, inner, .. } => (
                Some((inner, theta / (1.0 + theta))),
                self.values[k] / (1.0 + theta),
            ),
            _ => (None, self.values[k]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn disc(h: f64) -> Grid {
        Grid::new(ConvexDomain::disc(1.0).unwrap(), h).unwrap()
    }

    #[test]
    fn square_interior_count() {
        let g = Grid::new(ConvexDomain::square(1.0).unwrap(), 0.25).unwrap();
        assert_eq!(g.interior_count(), 49);
        let b = g.boundary_nodes().len();
        assert_eq!(b, 32);
        assert_eq!(g.active_nodes().len(), 81);
    }

    #[test]
    fn coarse_disc_is_rejected() {
        let e = Grid::new(ConvexDomain::disc(1.0).unwrap(), 0.5).unwrap_err();
        assert!(matches!(e, Error::TooCoarse { .. }));
    }

    #[test]
    fn disc_node_count_approaches_area() {
        let h = 1.0 / 64.0;
        let g = disc(h);
        let count = g.active_nodes().len() as f64;
        assert!((count * h * h / PI - 1.0).abs() < 0.05);
        assert!((g.interior_count() as f64 * h * h / PI - 1.0).abs() < 0.05);
    }

    #[test]
    fn partition_and_neighborhood_invariants() {
        let g = Grid::new(ConvexDomain::ellipse(1.0, 0.6).unwrap(), 0.05).unwrap();
        for n in 0..g.len() {
            let p = g.point(n);
            assert_eq!(g.is_active(n), g.domain.contains(p));
            if g.is_interior(n) {
                for &(di, dj) in &NEIGHBORS8 {
                    assert!(g.is_active(g.neighbor(n, di, dj).unwrap()));
                }
            }
        }
    }

    #[test]
    fn quadratic_derivatives_are_exact_everywhere() {
        let g = Arc::new(disc(1.0 / 16.0));
        let f = ScalarField::from_fn(g.clone(), |p| p[0] * p[0] + 3.0 * p[1] * p[1] + p[0] * p[1]);
        let (grad, hess) = f.derivatives();
        for &n in g.active_nodes() {
            let h = hess.values[n];
            assert!((h.xx - 2.0).abs() < 1e-9, "{h:?}");
            assert!((h.yy - 6.0).abs() < 1e-9);
            assert!((h.xy - 1.0).abs() < 1e-9);
            let p = g.point(n);
            assert!((grad.values[n][0] - (2.0 * p[0] + p[1])).abs() < 1e-9);
        }
    }

    #[test]
    fn hessian_converges_at_second_order() {
        let err = |h: f64| {
            let g = Arc::new(Grid::new(ConvexDomain::square(1.0).unwrap(), h).unwrap());
            let f = ScalarField::from_fn(g.clone(), |p| p[0].sin() * p[1].sin());
            let (_, hess) = f.derivatives();
            g.interior_nodes()
                .map(|n| {
                    let p = g.point(n);
                    let e = Sym2::new(
                        -p[0].sin() * p[1].sin(),
                        p[0].cos() * p[1].cos(),
                        -p[0].sin() * p[1].sin(),
                    );
                    hess.values[n].sub(&e).max_abs_entry()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1.0 / 16.0), err(1.0 / 32.0));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn norms() {
        let g = Arc::new(disc(1.0 / 64.0));
        let one = ScalarField::constant(g.clone(), 1.0);
        let n2 = one.lp_norm(2.0, &Region::Domain).unwrap();
        assert!((n2 / PI.sqrt() - 1.0).abs() < 0.02);
        let sq = ConvexDomain::polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let g = Arc::new(Grid::new(sq, 1.0 / 128.0).unwrap());
        let x = ScalarField::from_fn(g.clone(), |p| p[0]);
        let n1 = x.lp_norm(1.0, &Region::Domain).unwrap();
        assert!((n1 / 0.5 - 1.0).abs() < 0.02, "{n1}");
        assert_eq!(
            g.lp_norm(&x.values, 2.0, &Region::Mask(vec![false; g.len()])),
            Err(Error::EmptyRegion)
        );
    }

    #[test]
    fn boundary_links_are_second_order_for_smooth_data() {
        // u = x^2 sampled on a disc: the interpolation row holds up to O(h^2)
        let g = Arc::new(disc(1.0 / 32.0));
        let u = |p: Point| p[0] * p[0] + p[1];
        let bd = BoundaryData::from_fn(g.clone(), u);
        for (k, &p) in g.boundary_nodes().iter().enumerate() {
            let (inner, rhs) = bd.row(k);
            let lhs = u(g.point(p)) - inner.map_or(0.0, |(a, c)| c * u(g.point(a)));
            assert!((lhs - rhs).abs() < 4.0 * g.spacing * g.spacing);
        }
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let g = Arc::new(disc(0.1));
        let f = ScalarField::from_fn(g.clone(), |p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]);
        let v = f.interpolate([0.123, -0.377]).unwrap();
        let exact = 1.0 + 0.246 + 0.377 + 0.5 * 0.123 * -0.377;
        assert!((v - exact).abs() < 1e-12);
    }
}
