//! Small dense-free eigensolvers for real symmetric band matrices.
//!
//! A band matrix is reduced to tridiagonal form by Givens bulge chasing,
//! eigenvalues come from Sturm-sequence bisection on the tridiagonal, and
//! eigenvectors from inverse iteration on the original band matrix.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length must be n - 1");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to machine
    /// precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= f64::EPSILON * scale;
        hi += f64::EPSILON * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest(&self, k: usize) -> Vec<f64> {
        (0..k.min(self.len())).map(|i| self.eigenvalue(i)).collect()
    }
}

/// Real symmetric band matrix, lower triangle stored by diagonals.
///
/// One extra sub-diagonal is kept as room for the bulge created during
/// tridiagonal reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBand {
    n: usize,
    bandwidth: usize,
    /// `data[d * n + j] = A[j + d][j]` for `d <= bandwidth + 1`.
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self { n, bandwidth, data: vec![0.0; (bandwidth + 2) * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.bandwidth + 1 {
            0.0
        } else {
            self.data[d * self.n + j]
        }
    }

    /// Sets `A[i][j] = A[j][i] = v`. Panics outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.bandwidth, "entry ({i}, {j}) outside the band");
        self.data[d * self.n + j] = v;
    }

    #[inline]
    fn put(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d <= self.bandwidth + 1 {
            self.data[d * self.n + j] = v;
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let b = self.bandwidth;
        let mut y = vec![0.0; n];
        for j in 0..n {
            y[j] += self.data[j] * x[j];
            for d in 1..=b {
                let i = j + d;
                if i >= n {
                    break;
                }
                let a = self.data[d * n + j];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// Infinity norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Applies the plane rotation `[c s; -s c]` to rows and columns `p` and
    /// `p + 1`.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let q = p + 1;
        let w = self.bandwidth + 1;
        let lo = p.saturating_sub(w);
        let hi = (q + w).min(self.n - 1);
        for i in lo..=hi {
            if i == p || i == q {
                continue;
            }
            let x = self.get(i, p);
            let y = self.get(i, q);
            if x == 0.0 && y == 0.0 {
                continue;
            }
            self.put(i, p, c * x + s * y);
            self.put(i, q, -s * x + c * y);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(p, q);
        let cs = c * s;
        self.put(p, p, c * c * app + 2.0 * cs * apq + s * s * aqq);
        self.put(q, q, s * s * app - 2.0 * cs * apq + c * c * aqq);
        self.put(p, q, (c * c - s * s) * apq + cs * (aqq - app));
    }

    /// Orthogonal similarity reduction to tridiagonal form.
    pub fn to_tridiagonal(&self) -> SymTridiagonal {
        let n = self.n;
        let b = self.bandwidth;
        debug_assert!(self.all_finite());
        let mut a = self.clone();
        if b > 1 {
            for j in 0..n.saturating_sub(2) {
                for k in (2..=b).rev() {
                    let mut col = j;
                    let mut row = j + k;
                    while row < n {
                        let x = a.get(row - 1, col);
                        let y = a.get(row, col);
                        if y != 0.0 {
                            let h = x.hypot(y);
                            a.rotate(row - 1, x / h, y / h);
                            a.put(row, col, 0.0);
                        }
                        col = row - 1;
                        row += b;
                    }
                }
            }
        }
        let diag = (0..n).map(|i| a.get(i, i)).collect();
        let off = (0..n.saturating_sub(1)).map(|i| a.get(i + 1, i)).collect();
        SymTridiagonal { diag, off }
    }

    /// Band LU factorization of `A - shift I` with partial pivoting.
    pub fn shifted_lu(&self, shift: f64) -> BandLu {
        BandLu::factor(self, shift)
    }
}

/// LU factors of a shifted symmetric band matrix, row pivoting within the
/// band as in the classic banded Gaussian elimination.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    /// Row `i` stores columns `i - kl ..= i + 2 kl`.
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + 2 * self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn factor(a: &SymBand, shift: f64) -> Self {
        let n = a.n;
        let kl = a.bandwidth;
        let width = 3 * kl + 1;
        let mut lu = Self { n, kl, width, rows: vec![0.0; n * width], mult: vec![0.0; n * kl.max(1)], piv: vec![0; n] };
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + kl).min(n - 1);
            for j in lo..=hi {
                let v = a.get(i, j) - if i == j { shift } else { 0.0 };
                let k = lu.idx(i, j);
                lu.rows[k] = v;
            }
        }
        let tiny = f64::EPSILON * a.norm_inf().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let last = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = lu.rows[lu.idx(i, i)].abs();
            for r in i + 1..=last {
                let v = lu.rows[lu.idx(r, i)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.piv[i] = p;
            let cols_hi = (i + 2 * kl).min(n - 1);
            if p != i {
                for j in i..=cols_hi {
                    let a_i = lu.idx(i, j);
                    let a_p = lu.idx(p, j);
                    lu.rows.swap(a_i, a_p);
                }
            }
            let d_idx = lu.idx(i, i);
            if lu.rows[d_idx].abs() < tiny {
                lu.rows[d_idx] = if lu.rows[d_idx] < 0.0 { -tiny } else { tiny };
            }
            let pivot = lu.rows[d_idx];
            for m in 1..=last - i {
                let r = i + m;
                let l = lu.rows[lu.idx(r, i)] / pivot;
                lu.mult[i * kl.max(1) + m - 1] = l;
                let k = lu.idx(r, i);
                lu.rows[k] = 0.0;
                if l != 0.0 {
                    for j in i + 1..=cols_hi {
                        let u = lu.rows[lu.idx(i, j)];
                        let k = lu.idx(r, j);
                        lu.rows[k] -= l * u;
                    }
                }
            }
        }
        lu
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        for i in 0..n {
            let p = self.piv[i];
            if p != i {
                b.swap(i, p);
            }
            let last = (i + kl).min(n - 1);
            for m in 1..=last - i {
                b[i + m] -= self.mult[i * kl.max(1) + m - 1] * b[i];
            }
        }
        for i in (0..n).rev() {
            let hi = (i + 2 * kl).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=hi {
                s -= self.rows[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.rows[self.idx(i, i)];
        }
    }
}

/// Eigenpairs of a symmetric band matrix.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖A v - λ v‖` per pair.
    pub residuals: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `k` lowest eigenpairs of `a`.
///
/// Eigenvalues are bisected on the tridiagonal form and refined by the
/// Rayleigh quotient of the inverse-iteration vector. Vectors of clustered
/// eigenvalues are orthogonalized against each other, so a degenerate pair
/// comes out as an arbitrary orthonormal basis of its eigenspace.
pub fn lowest_eigenpairs(a: &SymBand, k: usize, rel_residual: f64) -> Result<EigenPairs> {
    let n = a.len();
    let k = k.min(n);
    let tri = a.to_tridiagonal();
    let norm = a.norm_inf().max(f64::MIN_POSITIVE);
    let cluster = 1e-7 * norm;
    let mut values: Vec<f64> = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for idx in 0..k {
        let lambda0 = tri.eigenvalue(idx);
        // nudge the shift so the factorization is not exactly singular
        let shift = lambda0 + 4.0 * f64::EPSILON * norm * (1.0 + idx as f64 * 1e-3);
        let lu = a.shifted_lu(shift);
        let mut v: Vec<f64> =
            (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.7548776662 + idx as f64 * 0.569840291)).sin()).collect();
        normalize(&mut v);
        let mut lambda = lambda0;
        let mut res = f64::INFINITY;
        for _ in 0..8 {
            lu.solve(&mut v);
            for (j, w) in vectors.iter().enumerate() {
                if (values[j] - lambda0).abs() < cluster {
                    let c = dot(&v, w);
                    v.iter_mut().zip(w).for_each(|(x, y)| *x -= c * y);
                }
            }
            if normalize(&mut v) == 0.0 {
                return Err(Error::NoConvergence(idx));
            }
            let av = a.mul_vec(&v);
            lambda = dot(&v, &av);
            res = av.iter().zip(&v).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
            if res <= rel_residual * norm {
                break;
            }
        }
        if !(res <= rel_residual * norm) {
            return Err(Error::NoConvergence(idx));
        }
        values.push(lambda);
        vectors.push(v);
        residuals.push(res);
    }
    Ok(EigenPairs { values, vectors, residuals })
}

/// Smallest eigenvalue via tridiagonal reduction and bisection.
pub fn min_eigenvalue(a: &SymBand) -> f64 {
    a.to_tridiagonal().eigenvalue(0)
}
