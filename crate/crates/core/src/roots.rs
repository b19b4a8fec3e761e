//! Bracketing root finders and sign-change scans.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::Result;

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign. Stops
/// when the bracket is narrower than `xtol` or the midpoint hits an exact
/// zero.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, mut f_lo: f64, f_hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(f_lo * f_hi <= 0.0, "bisect needs a sign change");
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `m` Chebyshev nodes of the open interval `(a, b)`, clustered at both
/// ends and ascending.
pub fn chebyshev_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let t = core::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            a + (b - a) * 0.5 * (1.0 - t.cos())
        })
        .collect()
}

/// Indices `i` with `values[i]` and `values[i + 1]` of opposite sign.
/// Non-finite samples break the chain.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].is_finite() && w[1].is_finite() && (w[0] < 0.0) != (w[1] < 0.0))
        .map(|(i, _)| i)
        .collect()
}
