//! Coefficient recurrences feeding the G-functions.
//!
//! Two equivalent forms are provided. The raw form generates `(e_n, f_n)`
//! directly; its terms carry factors `r^{-n/2} g^{-n}` and are multiplied by
//! a factorial prefactor inside the G-function. The rescaled form generates
//!
//! ```text
//! Λ_n = P_n e_n tanhⁿθ,   ξ_n = P_n f_n tanhⁿθ,   P_n = [2(n+q-1/4)]! / (2ⁿ n!)
//! ```
//!
//! which stays finite and is what every series evaluation uses. Written in
//! terms of `tanh θ / (sqrt(r) g) = 2 / (β+ + β-)` it is regular at `g = 0`
//! and `r = 0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{BargmannIndex, BogoliubovFrame, ModelParams};
use crate::scalar::Scalar;

/// Where the recurrence is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyPoint<T> {
    /// An arbitrary energy `E`, rejected if it sits on a pole line.
    Free(T),
    /// Exactly on the `m`-th pole line. Denominators are formed as
    /// `2 (n - m) β+ β-` so that no cancellation occurs.
    OnPole(usize),
}

/// Relative radius `τ = 1e-10 max(1, |E|)` inside which an energy is
/// considered to sit on a pole line.
pub const POLE_REL_TOLERANCE: f64 = 1e-10;

pub fn pole_tolerance<T: Scalar>(energy: T) -> T {
    T::lit(POLE_REL_TOLERANCE) * energy.abs().max(T::one())
}

/// Shared constants of one recurrence run.
#[derive(Clone, Debug)]
pub struct Recurrence<T = f64> {
    pub frame: BogoliubovFrame<T>,
    pub q: BargmannIndex,
    pub point: EnergyPoint<T>,
    delta_half: T,
    qv: T,
    r: T,
    g: T,
    /// `E + 1/2`
    shifted: T,
    /// `2 g² (1 - r²)`
    two_g2_1mr2: T,
    bb: T,
    /// `(1 - r) g² / (β+ + β-)`
    k_lambda: T,
    /// `1 / (2 (β+ + β-))`
    k_xi: T,
    /// `g² / (β+ + β-)²`
    k_xi2: T,
}

impl<T: Scalar> Recurrence<T> {
    pub fn new(p: &ModelParams<T>, point: EnergyPoint<T>) -> Result<Self> {
        let frame = p.frame()?;
        Ok(Self::with_frame(p, frame, point))
    }

    pub fn with_frame(p: &ModelParams<T>, frame: BogoliubovFrame<T>, point: EnergyPoint<T>) -> Self {
        let one = T::one();
        let qv = p.q.value::<T>();
        let g = frame.g;
        let r = p.r;
        let bb = frame.beta_plus * frame.beta_minus;
        let shifted = match point {
            EnergyPoint::Free(e) => e + T::lit(0.5),
            EnergyPoint::OnPole(m) => frame.shifted_pole(m, p.q),
        };
        let sum = frame.beta_plus + frame.beta_minus;
        Self {
            frame,
            q: p.q,
            point,
            delta_half: p.delta * T::lit(0.5),
            qv,
            r,
            g,
            shifted,
            two_g2_1mr2: T::lit(2.0) * g * g * (one - r * r),
            bb,
            k_lambda: (one - r) * g * g / sum,
            k_xi: one / (T::lit(2.0) * sum),
            k_xi2: g * g / (sum * sum),
        }
    }

    /// The energy `E` this recurrence runs at.
    pub fn energy(&self) -> T {
        self.shifted - T::lit(0.5)
    }

    /// `E + 1/2`.
    pub fn shifted_energy(&self) -> T {
        self.shifted
    }

    #[inline]
    fn nq(&self, n: usize) -> T {
        T::from_usize_lossy(n) + self.qv
    }

    /// `2 (n + q) β+ β- - 1/2 - E`.
    #[inline]
    pub fn denominator(&self, n: usize) -> T {
        match self.point {
            EnergyPoint::Free(_) => T::lit(2.0) * self.nq(n) * self.bb - self.shifted,
            EnergyPoint::OnPole(m) => {
                let d = T::from_usize_lossy(n) - T::from_usize_lossy(m);
                T::lit(2.0) * d * self.bb
            }
        }
    }

    /// Index and distance of the pole line closest to the energy.
    pub fn nearest_pole(&self) -> (usize, T) {
        match self.point {
            EnergyPoint::OnPole(m) => (m, T::zero()),
            EnergyPoint::Free(_) => {
                let spacing = T::lit(2.0) * self.bb;
                let x = self.shifted / spacing - self.qv;
                let n = if x <= T::zero() { 0 } else { x.round().to_usize().unwrap_or(usize::MAX) };
                let n = n.min(usize::MAX / 2);
                (n, self.denominator(n).abs())
            }
        }
    }

    /// Fails with [`Error::PoleProximity`] when a free energy sits on one of
    /// the first `n_max + 1` pole lines.
    pub fn check_poles(&self, n_max: usize) -> Result<()> {
        if let EnergyPoint::Free(e) = self.point {
            let (n, dist) = self.nearest_pole();
            if n <= n_max && dist < pole_tolerance(e) {
                return Err(Error::PoleProximity { n, distance: dist.to_f64().unwrap_or(0.0) });
            }
        }
        Ok(())
    }

    /// `Δ/2 - 2 g² (1 - r²)(n + q)`
    #[inline]
    fn num_e(&self, n: usize) -> T {
        self.delta_half - self.two_g2_1mr2 * self.nq(n)
    }

    /// `-Δ/2 - 2 g² (1 - r²)(n + q)`
    #[inline]
    fn num_f(&self, n: usize) -> T {
        -self.delta_half - self.two_g2_1mr2 * self.nq(n)
    }

    /// `2 (n + q) β- (2 - β+²) - (E + 1/2) β+`
    #[inline]
    fn diag_f(&self, n: usize) -> T {
        let bp = self.frame.beta_plus;
        T::lit(2.0) * self.nq(n) * self.frame.beta_minus * (T::lit(2.0) - bp * bp) - self.shifted * bp
    }

    /// `Λ_n` from `ξ_n` and the previous pair.
    #[inline]
    pub fn lambda(&self, n: usize, lam_prev: T, xi_prev: T, xi: T) -> T {
        let one = T::one();
        let mut num = self.num_e(n) * xi;
        if n > 0 {
            let nf = T::from_usize_lossy(n);
            let ratio = T::lit(2.0) * (self.nq(n) - T::lit(0.25)) * (self.nq(n) - T::lit(0.75)) / nf;
            let cross = (one + self.r) * self.frame.beta_minus * xi_prev
                - (one - self.r) * self.frame.beta_plus * lam_prev;
            num = num + self.k_lambda * ratio * cross;
        }
        num / self.denominator(n)
    }

    /// `ξ_{n+1}` from the pairs at `n` and `n - 1`.
    #[inline]
    pub fn xi_next(&self, n: usize, lam_prev: T, xi_prev: T, lam: T, xi: T) -> T {
        let one = T::one();
        let n1 = T::from_usize_lossy(n + 1);
        let mut out = (self.num_f(n) * self.frame.beta_plus * lam + self.diag_f(n) * xi) * self.k_xi / n1;
        if n > 0 {
            let nf = T::from_usize_lossy(n);
            let w = (self.nq(n) - T::lit(0.25)) * (self.nq(n) - T::lit(0.75)) / (nf * n1);
            let bm = self.frame.beta_minus;
            let cross = (one - self.r) * self.frame.beta_plus * lam_prev - (one + self.r) * bm * xi_prev;
            out = out + (one + self.r) * bm * cross * self.k_xi2 * w;
        }
        out
    }

    fn require_raw(&self) -> Result<()> {
        if !(self.r > T::zero()) {
            return Err(Error::InvalidParameter { name: "r", reason: "raw recurrence needs r > 0" });
        }
        if !(self.g > T::zero()) {
            return Err(Error::InvalidParameter { name: "g", reason: "raw recurrence needs g > 0" });
        }
        Ok(())
    }

    /// Raw `e_n` from `f_n` and the previous pair.
    #[inline]
    pub fn e_raw(&self, n: usize, e_prev: T, f_prev: T, f: T) -> T {
        let one = T::one();
        let k1 = self.g * (one - self.r) / (T::lit(2.0) * self.r.sqrt());
        let cross = (one + self.r) * self.frame.beta_minus * f_prev - (one - self.r) * self.frame.beta_plus * e_prev;
        (k1 * cross + self.num_e(n) * f) / self.denominator(n)
    }

    /// Raw `f_{n+1}` from the pairs at `n` and `n - 1`.
    #[inline]
    pub fn f_raw_next(&self, n: usize, e_prev: T, f_prev: T, e: T, f: T) -> T {
        let one = T::one();
        let w = (self.nq(n) + T::lit(0.25)) * (self.nq(n) + T::lit(0.75));
        let bm = self.frame.beta_minus;
        let bp = self.frame.beta_plus;
        let first = (one + self.r) * bm * ((one - self.r) * bp * e_prev - (one + self.r) * bm * f_prev)
            / (T::lit(16.0) * self.r * w);
        let second = (self.diag_f(n) * f + self.num_f(n) * bp * e) / (T::lit(8.0) * self.r.sqrt() * self.g * w);
        first + second
    }

    /// Coefficients of the compact form
    ///
    /// ```text
    /// Λ_n = a ξ_n + b ξ_{n-1} + c Λ_{n-1}
    /// ξ_n = d ξ_{n-1} + d̃ Λ_{n-1} + h ξ_{n-2} + h̃ Λ_{n-2}
    /// ```
    ///
    /// at finite `n >= 2`.
    pub fn compact_coefficients(&self, n: usize) -> AsymptoticCoefficients<T> {
        assert!(n >= 2, "compact coefficients need n >= 2");
        let one = T::one();
        let nf = T::from_usize_lossy(n);
        let den = self.denominator(n);
        let ratio = T::lit(2.0) * (self.nq(n) - T::lit(0.25)) * (self.nq(n) - T::lit(0.75)) / nf;
        let bm = self.frame.beta_minus;
        let bp = self.frame.beta_plus;
        let m = n - 1;
        let mf = T::from_usize_lossy(m);
        let w = (self.nq(m) - T::lit(0.25)) * (self.nq(m) - T::lit(0.75)) / (mf * nf);
        AsymptoticCoefficients {
            a: self.num_e(n) / den,
            b: self.k_lambda * ratio * (one + self.r) * bm / den,
            c: -self.k_lambda * ratio * (one - self.r) * bp / den,
            d: self.diag_f(m) * self.k_xi / nf,
            d_tilde: self.num_f(m) * bp * self.k_xi / nf,
            h: -(one + self.r) * (one + self.r) * bm * bm * self.k_xi2 * w,
            h_tilde: (one + self.r) * (one - self.r) * bp * bm * self.k_xi2 * w,
        }
    }
}

/// Which recurrence produced a [`CoefficientSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// `(e_n, f_n)`
    Raw,
    /// `(Λ_n, ξ_n)`
    Rescaled,
    /// `(0, f_n^c)` at the collapse point, where `e_n` is not defined.
    Collapse,
}

#[derive(Clone, Debug)]
pub struct CoefficientSeries<T = f64> {
    pub kind: SeriesKind,
    pub values: Vec<(T, T)>,
    pub energy: Option<T>,
    pub truncation: usize,
    pub n_star_estimate: usize,
}

impl<T: Scalar> CoefficientSeries<T> {
    pub fn first(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().map(|v| v.0)
    }

    pub fn second(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().map(|v| v.1)
    }
}

/// Streams `(n, Λ_n, ξ_n)` for `n = start, start + 1, ...`.
///
/// Only a two-deep window is kept, so arbitrarily long series can be
/// summed without storing them.
#[derive(Clone, Debug)]
pub struct RescaledStream<'a, T> {
    rec: &'a Recurrence<T>,
    n: usize,
    lam_prev: T,
    xi_prev: T,
    xi: T,
    forced_lambda: Option<T>,
}

impl<'a, T: Scalar> RescaledStream<'a, T> {
    /// Regular start: `ξ_0 = [2(q-1/4)]! f_0 = 1`.
    pub fn regular(rec: &'a Recurrence<T>) -> Self {
        Self { rec, n: 0, lam_prev: T::zero(), xi_prev: T::zero(), xi: T::one(), forced_lambda: None }
    }

    /// Exceptional start on pole line `m`: all coefficients below `m` vanish,
    /// `f_m = 0` and `e_m = 1`, hence `Λ_m = P_m tanh^m θ` and `ξ_m = 0`.
    pub fn exceptional(rec: &'a Recurrence<T>, m: usize) -> Self {
        let t = rec.frame.tanh_theta;
        let lead = if m == 0 {
            T::one()
        } else if t == T::zero() {
            T::zero()
        } else {
            (log_prefactor::<T>(m, rec.q) + T::from_usize_lossy(m) * t.ln()).exp()
        };
        Self { rec, n: m, lam_prev: T::zero(), xi_prev: T::zero(), xi: T::zero(), forced_lambda: Some(lead) }
    }

    pub fn index(&self) -> usize {
        self.n
    }
}

impl<T: Scalar> Iterator for RescaledStream<'_, T> {
    type Item = (usize, T, T);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        let n = self.n;
        let lam = match self.forced_lambda.take() {
            Some(v) => v,
            None => self.rec.lambda(n, self.lam_prev, self.xi_prev, self.xi),
        };
        let xi = self.xi;
        let xi_next = self.rec.xi_next(n, self.lam_prev, self.xi_prev, lam, xi);
        self.lam_prev = lam;
        self.xi_prev = xi;
        self.xi = xi_next;
        self.n = n + 1;
        Some((n, lam, xi))
    }
}

/// `ln P_n = ln([2(n+q-1/4)]! / (2ⁿ n!))`, accumulated as a sum of logs.
pub fn log_prefactor<T: Scalar>(n: usize, q: BargmannIndex) -> T {
    let s = q.offset();
    let mut acc = T::zero();
    for k in 1..=n {
        let top = T::from_usize_lossy((2 * k + s) * (2 * k + s - 1));
        acc = acc + (top / T::from_usize_lossy(2 * k)).ln();
    }
    acc
}

/// `N* ~ |E + 1/2| / (2 β+ β-)`: below this truncation the series has not
/// entered its asymptotic regime.
pub fn estimate_n_star<T: Scalar>(p: &ModelParams<T>, energy: T) -> Result<usize> {
    let frame = p.frame()?;
    let x = ((energy + T::lit(0.5)).abs() / frame.pole_spacing()).ceil();
    Ok(x.to_usize().unwrap_or(usize::MAX))
}

/// Raw recurrence `(e_n, f_n)` for `n = 0..=n_max` with `f_0 = 1`.
/// Needs `r > 0` and `g > 0`.
pub fn run_raw<T: Scalar>(p: &ModelParams<T>, energy: T, n_max: usize) -> Result<CoefficientSeries<T>> {
    let rec = Recurrence::new(p, EnergyPoint::Free(energy))?;
    rec.require_raw()?;
    rec.check_poles(n_max)?;
    let mut values = Vec::with_capacity(n_max + 1);
    let (mut e_prev, mut f_prev, mut f) = (T::zero(), T::zero(), T::one());
    for n in 0..=n_max {
        let e = rec.e_raw(n, e_prev, f_prev, f);
        values.push((e, f));
        let f_next = rec.f_raw_next(n, e_prev, f_prev, e, f);
        e_prev = e;
        f_prev = f;
        f = f_next;
    }
    Ok(CoefficientSeries {
        kind: SeriesKind::Raw,
        values,
        energy: Some(energy),
        truncation: n_max,
        n_star_estimate: estimate_n_star(p, energy)?,
    })
}

/// Raw coefficients on the `n`-th pole line: `e_0..e_{n-1}` and
/// `f_0..f_n`, the inputs of the degeneracy function `F_n`.
pub fn raw_on_pole_prefix<T: Scalar>(p: &ModelParams<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let rec = Recurrence::new(p, EnergyPoint::OnPole(n))?;
    rec.require_raw()?;
    let mut es = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n + 1);
    let (mut e_prev, mut f_prev, mut f) = (T::zero(), T::zero(), T::one());
    fs.push(f);
    for i in 0..n {
        let e = rec.e_raw(i, e_prev, f_prev, f);
        es.push(e);
        let f_next = rec.f_raw_next(i, e_prev, f_prev, e, f);
        e_prev = e;
        f_prev = f;
        f = f_next;
        fs.push(f);
    }
    Ok((es, fs))
}

/// Rescaled recurrence `(Λ_n, ξ_n)` for `n = 0..=n_max`.
pub fn run_rescaled<T: Scalar>(p: &ModelParams<T>, energy: T, n_max: usize) -> Result<CoefficientSeries<T>> {
    let rec = Recurrence::new(p, EnergyPoint::Free(energy))?;
    rec.check_poles(n_max)?;
    let values = RescaledStream::regular(&rec).take(n_max + 1).map(|(_, l, x)| (l, x)).collect();
    Ok(CoefficientSeries {
        kind: SeriesKind::Rescaled,
        values,
        energy: Some(energy),
        truncation: n_max,
        n_star_estimate: estimate_n_star(p, energy)?,
    })
}

/// Maps raw coefficients onto the rescaled ones in log space:
/// `Λ_n = P_n e_n tanhⁿθ`, `ξ_n = P_n f_n tanhⁿθ`.
pub fn rescale_raw<T: Scalar>(raw: &CoefficientSeries<T>, frame: &BogoliubovFrame<T>, q: BargmannIndex) -> Vec<(T, T)> {
    let lt = frame.tanh_theta.ln();
    let map = |v: T, log_scale: T| -> T {
        if v == T::zero() {
            T::zero()
        } else {
            v.signum() * (v.abs().ln() + log_scale).exp()
        }
    };
    let mut log_p = T::zero();
    let s = q.offset();
    raw.values
        .iter()
        .enumerate()
        .map(|(n, &(e, f))| {
            if n > 0 {
                let top = T::from_usize_lossy((2 * n + s) * (2 * n + s - 1));
                log_p = log_p + (top / T::from_usize_lossy(2 * n)).ln();
            }
            let scale = log_p + T::from_usize_lossy(n) * lt;
            (map(e, scale), map(f, scale))
        })
        .collect()
}

/// Collapse-point coefficients from
/// `f_{n+1} = [(n+q) f_n - f_{n-1}/4] / [(n+q+1/4)(n+q+3/4)]`, `f_0 = 1`.
/// The result is `1 / (2ⁿ n!)` whatever `q`.
pub fn collapse_coefficients<T: Scalar>(n_max: usize, q: BargmannIndex) -> CoefficientSeries<T> {
    // f_n is the decaying solution, so forward rounding errors grow with n;
    // the state is carried as an unevaluated sum hi + lo
    let qv = q.value::<T>();
    let mut values = Vec::with_capacity(n_max + 1);
    let (mut f_prev, mut f) = (Dd::from(T::zero()), Dd::from(T::one()));
    for n in 0..=n_max {
        values.push((T::zero(), f.value()));
        let nq = T::from_usize_lossy(n) + qv;
        let num = f.mul(nq).add(f_prev.mul(T::lit(-0.25)));
        let next = num.div((nq + T::lit(0.25)) * (nq + T::lit(0.75)));
        f_prev = f;
        f = next;
    }
    CoefficientSeries { kind: SeriesKind::Collapse, values, energy: None, truncation: n_max, n_star_estimate: 0 }
}

/// Double-word number built from error-free transformations.
#[derive(Clone, Copy, Debug)]
struct Dd<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> Dd<T> {
    fn from(v: T) -> Self {
        Self { hi: v, lo: T::zero() }
    }

    fn value(self) -> T {
        self.hi + self.lo
    }

    fn fast_two_sum(a: T, b: T) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    fn mul(self, b: T) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p) + self.lo * b;
        Self::fast_two_sum(p, e)
    }

    fn add(self, o: Self) -> Self {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (o.hi - bb) + self.lo + o.lo;
        Self::fast_two_sum(s, e)
    }

    fn div(self, b: T) -> Self {
        let q = self.hi / b;
        let p = q * b;
        let e = q.mul_add(b, -p);
        let r = ((self.hi - p) - e + self.lo) / b;
        Self::fast_two_sum(q, r)
    }
}

/// Limits of the compact-form coefficients as `n → ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticCoefficients<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub d_tilde: T,
    pub h: T,
    pub h_tilde: T,
}

impl<T: Scalar> AsymptoticCoefficients<T> {
    pub fn as_array(&self) -> [T; 7] {
        [self.a, self.b, self.c, self.d, self.d_tilde, self.h, self.h_tilde]
    }
}

/// Closed-form limits of the recurrence coefficients. Needs `0 < g < g_c`
/// and `r > 0`.
pub fn asymptotic_coefficients<T: Scalar>(p: &ModelParams<T>) -> Result<AsymptoticCoefficients<T>> {
    let f = p.frame()?;
    let g = f.g;
    let r = p.r;
    if !(g > T::zero()) {
        return Err(Error::InvalidParameter { name: "g", reason: "asymptotics need g > 0" });
    }
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter { name: "r", reason: "asymptotics need r > 0" });
    }
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (bp, bm, t) = (f.beta_plus, f.beta_minus, f.tanh_theta);
    let sr = r.sqrt();
    let one_m_r2 = one - r * r;
    Ok(AsymptoticCoefficients {
        a: -g * g * one_m_r2 / (bp * bm),
        b: g * one_m_r2 * t / (two * sr * bp),
        // the Λ_{n-1} term of the Λ recurrence carries (1 - r)²
        c: -g * (one - r) * (one - r) * t / (two * sr * bm),
        d: bm * (two - bp * bp) * t / (two * sr * g),
        d_tilde: -g * g * one_m_r2 * bp * t / (two * sr * g),
        h: -(one + r) * (one + r) * bm * bm * t * t / (four * r),
        h_tilde: one_m_r2 * bp * bm * t * t / (four * r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parity;

    fn params(delta: f64, r: f64, g: f64, q: BargmannIndex) -> ModelParams {
        ModelParams::new(delta, r, g, q, Parity::Even).unwrap()
    }

    #[test]
    fn isotropic_e_relation() {
        // at r = 1 the e-recurrence reduces to (Δ/2) f_n / D_n
        for q in BargmannIndex::ALL {
            let p = params(0.7, 1.0, 0.3, q);
            let s = run_raw(&p, 0.37, 20).unwrap();
            let f = p.frame().unwrap();
            for (n, &(e, fv)) in s.values.iter().enumerate() {
                let d = 2.0 * (n as f64 + q.as_f64()) * f.beta_plus - 0.5 - 0.37;
                let expect = 0.35 * fv / d;
                assert!((e - expect).abs() <= 1e-13 * expect.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn first_e_coefficient() {
        let p = params(0.0, 1.0, 0.3, BargmannIndex::Quarter);
        let s = run_raw(&p, -0.3, 3).unwrap();
        assert_eq!(s.values[0].0, 0.0);
        // general r: e_0 = [Δ/2 - 2 g² (1 - r²) q] / D_0
        let p = params(0.0, 0.4, 0.3, BargmannIndex::Quarter);
        let s = run_raw(&p, -0.3, 3).unwrap();
        let f = p.frame().unwrap();
        let d0 = 0.5 * f.beta_plus * f.beta_minus - 0.5 + 0.3;
        let expect = -2.0 * 0.09 * (1.0 - 0.16) * 0.25 / d0;
        assert!((s.values[0].0 - expect).abs() < 1e-15);
    }

    #[test]
    fn rescaled_start() {
        for q in BargmannIndex::ALL {
            let p = params(0.5, 0.2, 0.2, q);
            let s = run_rescaled(&p, -0.3, 5).unwrap();
            let raw = run_raw(&p, -0.3, 5).unwrap();
            assert_eq!(s.values[0].1, 1.0);
            assert!((s.values[0].0 - raw.values[0].0).abs() < 1e-15);
        }
    }

    #[test]
    fn pole_rejection() {
        let p = params(0.5, 0.2, 0.2, BargmannIndex::Quarter);
        let e3 = p.frame().unwrap().pole_energy(3, p.q);
        match run_rescaled(&p, e3, 10) {
            Err(Error::PoleProximity { n, .. }) => assert_eq!(n, 3),
            other => panic!("expected pole proximity, got {other:?}"),
        }
        // the pole beyond the truncation is not an obstacle
        assert!(run_rescaled(&p, e3, 2).is_ok());
        assert!(run_rescaled(&p, e3 + 1e-6, 10).is_ok());
    }

    #[test]
    fn raw_needs_positive_r_and_g() {
        assert!(run_raw(&params(0.5, 0.0, 0.2, BargmannIndex::Quarter), -0.3, 5).is_err());
        assert!(run_raw(&params(0.5, 0.2, 0.0, BargmannIndex::Quarter), -0.3, 5).is_err());
        assert!(run_rescaled(&params(0.5, 0.0, 0.2, BargmannIndex::Quarter), -0.3, 5).is_ok());
        assert!(run_rescaled(&params(0.5, 0.2, 0.0, BargmannIndex::Quarter), -0.3, 5).is_ok());
    }

    #[test]
    fn collapse_series_closed_form() {
        for q in BargmannIndex::ALL {
            let s = collapse_coefficients::<f64>(60, q);
            let mut closed = 1.0f64;
            for (n, f) in s.second().enumerate() {
                if n > 0 {
                    closed /= 2.0 * n as f64;
                }
                assert!((f - closed).abs() <= 1e-14 * closed, "n = {n}: {f} vs {closed}");
            }
        }
        let s = collapse_coefficients::<f64>(2, BargmannIndex::Quarter);
        assert_eq!(s.values[0].1, 1.0);
        assert_eq!(s.values[1].1, 0.5);
        assert_eq!(s.values[2].1, 0.125);
    }

    #[test]
    fn log_prefactor_small_n() {
        let q = BargmannIndex::Quarter;
        // (2n)! / (2ⁿ n!) = (2n - 1)!!
        assert_eq!(log_prefactor::<f64>(0, q), 0.0);
        assert!((log_prefactor::<f64>(3, q) - 15f64.ln()).abs() < 1e-14);
        let q = BargmannIndex::ThreeQuarters;
        // (2n + 1)! / (2ⁿ n!) = (2n + 1)!!
        assert!((log_prefactor::<f64>(3, q) - 105f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn n_star_uses_absolute_offset() {
        let p = params(0.5, 0.25, 0.8 * 0.9999, BargmannIndex::Quarter);
        let n = estimate_n_star(&p, -1.0).unwrap();
        assert_eq!(n, 23);
        let n_above = estimate_n_star(&p, 0.0).unwrap();
        assert_eq!(n_above, n);
        let base = params(0.5, 0.25, 0.1, BargmannIndex::Quarter);
        let mut last = 0;
        for k in 1..8 {
            let p = base.near_collapse(10f64.powi(-k)).unwrap();
            let n = estimate_n_star(&p, 0.5).unwrap();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn isotropic_asymptotics() {
        let a = asymptotic_coefficients(&params(0.5, 1.0, 0.3, BargmannIndex::Quarter)).unwrap();
        assert_eq!(a.a, 0.0);
        assert_eq!(a.h_tilde, 0.0);
    }

    #[test]
    fn h_tilde_positive_below_isotropy() {
        for r in [0.05, 0.25, 0.6, 0.95] {
            let a = asymptotic_coefficients(&params(0.5, r, 0.5 / (1.0 + r), BargmannIndex::Quarter)).unwrap();
            assert!(a.h_tilde > 0.0);
        }
    }
}
