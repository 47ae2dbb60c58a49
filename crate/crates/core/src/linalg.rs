//! Sparse matrices and the two linear solvers used inside Newton and for the
//! linearized equation: banded LU without pivoting and Jacobi-preconditioned
//! BiCGSTAB.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Systems with at most this many unknowns are factorized directly.
pub const DIRECT_LIMIT: usize = 257 * 257;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Row-by-row builder. Entries within a row may repeat and are summed.
#[derive(Debug, Default)]
pub struct CsrBuilder {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    pending: Vec<(usize, f64)>,
}

impl CsrBuilder {
    pub fn new(n: usize) -> Self {
        CsrBuilder {
            n,
            row_ptr: vec![0],
            ..Default::default()
        }
    }

    pub fn add(&mut self, col: usize, val: f64) {
        self.pending.push((col, val));
    }

    pub fn finish_row(&mut self) {
        self.pending.sort_unstable_by_key(|e| e.0);
        let mut last = usize::MAX;
        for &(c, v) in &self.pending {
            if c == last {
                *self.vals.last_mut().unwrap() += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = c;
            }
        }
        self.pending.clear();
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(self) -> Csr {
        debug_assert_eq!(self.row_ptr.len(), self.n + 1);
        Csr {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl Csr {
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(0.0, |e| e.1))
            .collect()
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

/// Outcome details of a linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub direct: bool,
    /// Smallest absolute pivot (direct) or zero.
    pub smallest_pivot: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `A x = b`, directly for small systems and iteratively otherwise.
pub fn solve(a: &Csr, b: &[f64], x0: Option<&[f64]>) -> Result<(Vec<f64>, SolveInfo)> {
    if a.n <= DIRECT_LIMIT {
        let lu = BandedLu::factor(a)?;
        let x = lu.solve(b);
        let info = SolveInfo {
            direct: true,
            smallest_pivot: lu.smallest_pivot,
            iterations: 0,
            relative_residual: relative_residual(a, &x, b),
        };
        Ok((x, info))
    } else {
        bicgstab(a, b, x0, 1e-12, 20 * a.n.max(1000))
    }
}

pub fn relative_residual(a: &Csr, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; a.n];
    a.mul_vec(x, &mut r);
    let num: f64 = r.iter().zip(b).map(|(ri, bi)| (ri - bi) * (ri - bi)).sum();
    let den: f64 = b.iter().map(|v| v * v).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// LU factorization in band storage, no pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<f64>,
    pub smallest_pivot: f64,
}

impl BandedLu {
    pub fn factor(a: &Csr) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let w = kl + ku + 1;
        let mut band = vec![0.0; n * w];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for (c, v) in a.row(i) {
                band[i * w + c + kl - i] = v;
                scale = scale.max(v.abs());
            }
        }
        let threshold = 1e-13 * scale.max(f64::MIN_POSITIVE);
        let mut smallest = f64::INFINITY;
        for k in 0..n {
            let piv = band[k * w + kl];
            smallest = smallest.min(piv.abs());
            if !(piv.abs() > threshold) {
                return Err(Error::SingularSystem {
                    row: k,
                    pivot: piv,
                    smallest,
                });
            }
            let jmax = (k + ku).min(n - 1);
            let imax = (k + kl).min(n - 1);
            for i in k + 1..=imax {
                let ik = i * w + k + kl - i;
                let l = band[ik] / piv;
                if l == 0.0 {
                    continue;
                }
                band[ik] = l;
                let (head, tail) = band.split_at_mut(i * w);
                let krow = &head[k * w..k * w + w];
                let irow = &mut tail[..w];
                // columns k+1..=jmax: index c + kl - row
                let ks = k + 1 + kl - k;
                let is = k + 1 + kl - i;
                let len = jmax - k;
                for (t, kv) in krow[ks..ks + len].iter().enumerate() {
                    irow[is + t] -= l * kv;
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            band,
            smallest_pivot: smallest,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = kl + ku + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let mut s = x[i];
            for j in lo..i {
                s -= self.band[i * w + j + kl - i] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= self.band[i * w + j + kl - i] * x[j];
            }
            x[i] = s / self.band[i * w + kl];
        }
        x
    }
}

/// BiCGSTAB with Jacobi preconditioning.
pub fn bicgstab(
    a: &Csr,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveInfo)> {
    let n = a.n;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|d| *d == 0.0) {
        return Err(Error::SingularSystem {
            row: i,
            pivot: 0.0,
            smallest: 0.0,
        });
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveInfo {
                direct: false,
                smallest_pivot: 0.0,
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut r = vec![0.0; n];
    a.mul_vec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok((
                x,
                SolveInfo {
                    direct: false,
                    smallest_pivot: 0.0,
                    iterations: it,
                    relative_residual: res,
                },
            ));
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv[i] * p[i];
        }
        a.mul_vec(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            break;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
            z[i] = inv[i] * s[i];
        }
        a.mul_vec(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
    }
    let res = relative_residual(a, &x, b);
    if res <= tol * 10.0 {
        return Ok((
            x,
            SolveInfo {
                direct: false,
                smallest_pivot: 0.0,
                iterations: max_iter,
                relative_residual: res,
            },
        ));
    }
    Err(Error::IterativeStall {
        iterations: max_iter,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 5-point Laplacian on an m x m grid, Dirichlet zero outside.
    fn laplacian(m: usize) -> Csr {
        let mut b = CsrBuilder::new(m * m);
        for j in 0..m {
            for i in 0..m {
                let k = j * m + i;
                b.add(k, 4.0);
                if i > 0 {
                    b.add(k - 1, -1.0);
                }
                if i + 1 < m {
                    b.add(k + 1, -1.0);
                }
                if j > 0 {
                    b.add(k - m, -1.0);
                }
                if j + 1 < m {
                    b.add(k + m, -1.0);
                }
                b.finish_row();
            }
        }
        b.build()
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = laplacian(20);
        let x_true: Vec<f64> = (0..a.n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let mut b = vec![0.0; a.n];
        a.mul_vec(&x_true, &mut b);
        let lu = BandedLu::factor(&a).unwrap();
        let x1 = lu.solve(&b);
        let (x2, info) = bicgstab(&a, &b, None, 1e-13, 5000).unwrap();
        assert!(!info.direct);
        for i in 0..a.n {
            assert!((x1[i] - x_true[i]).abs() < 1e-10);
            assert!((x2[i] - x_true[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_system_reports_pivot() {
        let mut b = CsrBuilder::new(2);
        b.add(0, 1.0);
        b.add(1, 1.0);
        b.finish_row();
        b.add(0, 1.0);
        b.add(1, 1.0);
        b.finish_row();
        let e = BandedLu::factor(&b.build()).unwrap_err();
        assert!(matches!(e, Error::SingularSystem { row: 1, .. }));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let mut b = CsrBuilder::new(1);
        b.add(0, 1.5);
        b.add(0, 2.5);
        b.finish_row();
        let a = b.build();
        assert_eq!(a.vals, vec![4.0]);
    }
}
