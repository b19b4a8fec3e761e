//! G-functions and the degeneracy function `F_n(g)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BargmannIndex, Coupling, ModelParams, Parity};
use crate::recurrence::{estimate_n_star, raw_on_pole_prefix, EnergyPoint, Recurrence, RescaledStream};
use crate::scalar::{Accumulator, NeumaierSum, Scalar};

/// Default relative tolerance of series evaluations.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default minimum truncation of the regular G-function.
pub const MIN_TRUNCATION: usize = 1000;

/// Terms are inspected in blocks of this size when deciding to stop early.
const BLOCK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GEvaluation<T = f64> {
    pub value: T,
    /// Number of terms actually summed.
    pub truncation_used: usize,
    /// Estimated size of the neglected tail. This is the geometric
    /// extrapolation of the last two blocks of terms, which is never smaller
    /// than the last increment; `inf` when the terms are not yet decaying.
    pub tail_estimate: T,
    pub converged: bool,
    /// `min_n |E - E_n^pole|`
    pub pole_distance: T,
}

impl<T: Scalar> GEvaluation<T> {
    /// Turns an unconverged evaluation into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value.to_f64().unwrap_or(f64::NAN),
                tail: self.tail_estimate.to_f64().unwrap_or(f64::NAN),
                terms: self.truncation_used,
            })
        }
    }
}

/// Both components `ΣΛ_n` and `Σξ_n` of one series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSums<T = f64> {
    pub lambda: T,
    pub xi: T,
    pub terms: usize,
    pub tail_estimate: T,
    pub converged: bool,
    pub pole_distance: T,
}

impl<T: Scalar> SeriesSums<T> {
    /// `G_± = ΣΛ_n ± Σξ_n`
    pub fn g(&self, parity: Parity) -> T {
        match parity {
            Parity::Even => self.lambda + self.xi,
            Parity::Odd => self.lambda - self.xi,
        }
    }

    pub fn evaluation(&self, parity: Parity) -> GEvaluation<T> {
        GEvaluation {
            value: self.g(parity),
            truncation_used: self.terms,
            tail_estimate: self.tail_estimate,
            converged: self.converged,
            pole_distance: self.pole_distance,
        }
    }
}

/// Sums a rescaled stream with early stopping.
///
/// Stopping is decided on `max(|Λ_n|, |ξ_n|)` so both parities share one
/// truncation. No stop happens before `min_terms`.
fn sum_stream<T: Scalar, A: Accumulator<T>>(
    stream: RescaledStream<'_, T>,
    n_max: usize,
    min_terms: usize,
    tol: T,
) -> (T, T, usize, T, bool) {
    let mut sl = A::default();
    let mut sx = A::default();
    let mut terms = 0usize;
    let mut block_max = T::zero();
    let mut prev_block_max = T::nan();
    let mut tail = T::infinity();
    let mut in_block = 0usize;
    let start = stream.index();
    for (n, lam, xi) in stream {
        if n > n_max {
            break;
        }
        sl.push(lam);
        sx.push(xi);
        terms = n + 1 - start;
        block_max = block_max.max(lam.abs().max(xi.abs()));
        in_block += 1;
        if in_block == BLOCK {
            tail = block_tail(block_max, prev_block_max);
            let scale = T::one().max(sl.total().abs()).max(sx.total().abs());
            if n + 1 >= min_terms && tail < tol * T::lit(0.1) * scale {
                return (sl.total(), sx.total(), terms, tail, true);
            }
            // the rest cannot move the sum in this precision; also keeps the
            // loop out of subnormal arithmetic when an exact truncation is asked for
            if tail < scale * T::epsilon() * T::epsilon() {
                return (sl.total(), sx.total(), terms, tail, true);
            }
            prev_block_max = block_max;
            block_max = T::zero();
            in_block = 0;
        }
        if !block_max.is_finite() {
            break;
        }
    }
    if in_block > 0 && prev_block_max.is_finite() {
        // partial last block: compare against the previous full block
        let scaled = block_max;
        tail = block_tail(scaled, prev_block_max).max(scaled);
    }
    let scale = T::one().max(sl.total().abs()).max(sx.total().abs());
    let converged = tail < tol * scale;
    (sl.total(), sx.total(), terms, tail, converged)
}

/// Geometric tail of a series whose block maxima decay from `prev` to `cur`.
fn block_tail<T: Scalar>(cur: T, prev: T) -> T {
    if cur == T::zero() {
        return T::zero();
    }
    if !(prev > T::zero()) || !(cur < prev) {
        return T::infinity();
    }
    let rho = (cur / prev).powf(T::one() / T::from_usize_lossy(BLOCK));
    cur * rho / (T::one() - rho)
}

/// Both components of the regular series at energy `E`, summed with the
/// accumulator `A`.
pub fn eval_sums_with<T: Scalar, A: Accumulator<T>>(
    p: &ModelParams<T>,
    energy: T,
    n_max: usize,
    tol: T,
) -> Result<SeriesSums<T>> {
    let rec = Recurrence::new(p, EnergyPoint::Free(energy))?;
    rec.check_poles(n_max)?;
    let n_star = estimate_n_star(p, energy)?;
    let min_terms = (2 * n_star).max(BLOCK * 2);
    let (lambda, xi, terms, tail, converged) =
        sum_stream::<T, A>(RescaledStream::regular(&rec), n_max, min_terms, tol);
    Ok(SeriesSums { lambda, xi, terms, tail_estimate: tail, converged, pole_distance: rec.nearest_pole().1 })
}

pub fn eval_sums<T: Scalar>(p: &ModelParams<T>, energy: T, n_max: usize, tol: T) -> Result<SeriesSums<T>> {
    eval_sums_with::<T, NeumaierSum<T>>(p, energy, n_max, tol)
}

/// Regular G-function `G_±(E)` of the subspace and parity in `p`, summed up
/// to `n_max` terms. An unconverged sum is returned with
/// `converged = false`.
pub fn eval_g<T: Scalar>(p: &ModelParams<T>, energy: T, n_max: usize, tol: T) -> Result<GEvaluation<T>> {
    Ok(eval_sums(p, energy, n_max, tol)?.evaluation(p.parity))
}

/// Truncation that satisfies the default rule `N >= max(2 N*, 1000)`.
pub fn default_truncation<T: Scalar>(p: &ModelParams<T>, energy: T) -> Result<usize> {
    Ok((2 * estimate_n_star(p, energy)?).max(MIN_TRUNCATION))
}

/// Both components of the exceptional series on pole line `m`.
pub fn eval_exceptional_sums<T: Scalar>(
    p: &ModelParams<T>,
    m: usize,
    n_max: usize,
    tol: T,
) -> Result<SeriesSums<T>> {
    let rec = Recurrence::new(p, EnergyPoint::OnPole(m))?;
    let (lambda, xi, terms, tail, converged) =
        sum_stream::<T, NeumaierSum<T>>(RescaledStream::exceptional(&rec, m), n_max, m + 2 * BLOCK, tol);
    Ok(SeriesSums { lambda, xi, terms, tail_estimate: tail, converged, pole_distance: T::zero() })
}

/// Exceptional G-function on the `m`-th pole line as a function of the
/// coupling in `p`. Its zeros are the non-degenerate exceptional points.
pub fn eval_g_exceptional<T: Scalar>(
    p: &ModelParams<T>,
    m: usize,
    n_max: usize,
    tol: T,
) -> Result<GEvaluation<T>> {
    Ok(eval_exceptional_sums(p, m, n_max, tol)?.evaluation(p.parity))
}

/// Finite sum shared by [`eval_f`] and [`eval_f_at_collapse`].
///
/// `F_n = Σ_i f_i c^k / k! [Δ/2 - 2 g² (1 - r²)(n + q)]
///      + Σ_{k>=1} f_i / k! 2k (1 + r)(1 - r)^{2k-1} b^k`, `k = n - i`,
/// with `c = (1 - r)² b` and `b = g / (4 sqrt(r) β-)`. The second form of
/// the coupling term stays finite at `r = 1`.
fn degeneracy_sum<T: Scalar>(fs: &[T], n: usize, delta: T, r: T, b: T, diag: T) -> T {
    let one = T::one();
    let c = (one - r) * (one - r) * b;
    let base = delta * T::lit(0.5) - diag;
    let mut acc = NeumaierSum::new();
    // running c^k / k! and b^k / k!
    let mut ck = one;
    let mut bk = one;
    for k in 0..=n {
        if k > 0 {
            let kf = T::from_usize_lossy(k);
            ck = ck * c / kf;
            bk = bk * b / kf;
        }
        let fi = fs[n - k];
        let mut term = ck * base;
        if k > 0 {
            let kf = T::from_usize_lossy(k);
            term = term + T::lit(2.0) * kf * (one + r) * (one - r).powi(2 * k as i32 - 1) * bk;
        }
        acc.add(fi * term);
    }
    acc.value()
}

/// Degeneracy function `F_n(g)`. Its zeros are the couplings where a doubly
/// degenerate level sits on the `n`-th pole line. Needs `0 < g < g_c`, `r > 0`.
pub fn eval_f<T: Scalar>(delta: T, r: T, q: BargmannIndex, n: usize, g: T) -> Result<T> {
    eval_f_coupling(delta, r, q, n, Coupling::Value(g))
}

pub fn eval_f_coupling<T: Scalar>(delta: T, r: T, q: BargmannIndex, n: usize, coupling: Coupling<T>) -> Result<T> {
    let p = ModelParams::with_coupling(delta, r, coupling, q, Parity::Even)?;
    let frame = p.frame()?;
    let (_, fs) = raw_on_pole_prefix(&p, n)?;
    let g = frame.g;
    let b = g / (T::lit(4.0) * r.sqrt() * frame.beta_minus);
    let diag = T::lit(2.0) * g * g * (T::one() - r * r) * (T::from_usize_lossy(n) + q.value());
    Ok(degeneracy_sum(&fs, n, delta, r, b, diag))
}

/// `F_n` continued to `g = g_c` with `f_i = 1/(2^i i!)`. Needs `r > 0`.
pub fn eval_f_at_collapse<T: Scalar>(delta: T, r: T, q: BargmannIndex, n: usize) -> Result<T> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidParameter { name: "r", reason: "collapse continuation needs r > 0" });
    }
    let one = T::one();
    let fs = collapse_f(n);
    // at g_c: β- = 2 sqrt(r) / (1 + r), so g / (4 sqrt(r) β-) = 1 / (8 r)
    let b = one / (T::lit(8.0) * r);
    let diag = T::lit(2.0) * (one - r) / (one + r) * (T::from_usize_lossy(n) + q.value());
    Ok(degeneracy_sum(&fs, n, delta, r, b, diag))
}

fn collapse_f<T: Scalar>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut f = T::one();
    out.push(f);
    for i in 1..=n {
        f = f / T::from_usize_lossy(2 * i);
        out.push(f);
    }
    out
}

/// `(1 + r)² / (8 r)`, the growth factor of `F_n(g_c)` in `n`.
pub fn collapse_scale<T: Scalar>(r: T, n: usize) -> T {
    ((T::one() + r) * (T::one() + r) / (T::lit(8.0) * r)).powi(n as i32)
}
