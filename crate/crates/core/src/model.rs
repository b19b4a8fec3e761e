//! Model parameters and the closed-form quantities derived from them.
//!
//! Units: the mode frequency is 1, the rotating coupling is `g` and the
//! counter-rotating coupling is `r g`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bargmann index of the two irreducible photon-number subspaces:
/// even photon numbers (`q = 1/4`) and odd photon numbers (`q = 3/4`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BargmannIndex {
    Quarter,
    ThreeQuarters,
}

impl BargmannIndex {
    pub const ALL: [BargmannIndex; 2] = [BargmannIndex::Quarter, BargmannIndex::ThreeQuarters];

    #[inline]
    pub fn value<T: Scalar>(self) -> T {
        match self {
            BargmannIndex::Quarter => T::lit(0.25),
            BargmannIndex::ThreeQuarters => T::lit(0.75),
        }
    }

    /// `2(q - 1/4)`: the lowest photon number of the subspace.
    #[inline]
    pub fn offset(self) -> usize {
        match self {
            BargmannIndex::Quarter => 0,
            BargmannIndex::ThreeQuarters => 1,
        }
    }

    pub fn from_f64(q: f64) -> Result<Self> {
        if q == 0.25 {
            Ok(BargmannIndex::Quarter)
        } else if q == 0.75 {
            Ok(BargmannIndex::ThreeQuarters)
        } else {
            Err(Error::InvalidParameter { name: "q", reason: "Bargmann index must be 1/4 or 3/4" })
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value()
    }
}

/// Z2 parity label inside a Bargmann subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const ALL: [Parity; 2] = [Parity::Even, Parity::Odd];

    #[inline]
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    #[inline]
    pub fn as_scalar<T: Scalar>(self) -> T {
        match self {
            Parity::Even => T::one(),
            Parity::Odd => -T::one(),
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Parity::Even),
            -1 => Ok(Parity::Odd),
            _ => Err(Error::InvalidParameter { name: "parity", reason: "parity sign must be +1 or -1" }),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// How the coupling strength is specified.
///
/// `CollapseOffset(eps)` means `g = g_c (1 - eps)`; it keeps `1 - g/g_c`
/// exact so the frame stays accurate far closer to the collapse point than
/// an absolute `g` allows. `Critical` is the collapse point itself, where
/// the Bogoliubov transformation is singular; only the collapse module
/// accepts it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling<T> {
    Value(T),
    CollapseOffset(T),
    Critical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T = f64> {
    pub delta: T,
    pub r: T,
    pub coupling: Coupling<T>,
    pub q: BargmannIndex,
    pub parity: Parity,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(delta: T, r: T, g: T, q: BargmannIndex, parity: Parity) -> Result<Self> {
        Self::with_coupling(delta, r, Coupling::Value(g), q, parity)
    }

    pub fn with_coupling(
        delta: T,
        r: T,
        coupling: Coupling<T>,
        q: BargmannIndex,
        parity: Parity,
    ) -> Result<Self> {
        let p = Self { delta, r, coupling, q, parity };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters at `g = g_c (1 - eps)`.
    pub fn near_collapse(&self, eps: T) -> Result<Self> {
        Self::with_coupling(self.delta, self.r, Coupling::CollapseOffset(eps), self.q, self.parity)
    }

    pub fn with_g(&self, g: T) -> Result<Self> {
        Self::new(self.delta, self.r, g, self.q, self.parity)
    }

    pub fn with_parity(&self, parity: Parity) -> Self {
        Self { parity, ..*self }
    }

    pub fn with_q(&self, q: BargmannIndex) -> Self {
        Self { q, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta < T::zero() {
            return Err(Error::InvalidParameter { name: "delta", reason: "must be finite and >= 0" });
        }
        if !self.r.is_finite() || self.r < T::zero() {
            return Err(Error::InvalidParameter { name: "r", reason: "must be finite and >= 0" });
        }
        match self.coupling {
            Coupling::Value(g) if !g.is_finite() || g < T::zero() => {
                Err(Error::InvalidParameter { name: "g", reason: "must be finite and >= 0" })
            }
            Coupling::CollapseOffset(eps) if !(eps > T::zero() && eps <= T::one()) => {
                Err(Error::InvalidParameter { name: "eps", reason: "collapse offset must lie in (0, 1]" })
            }
            _ => Ok(()),
        }
    }

    pub fn g_c(&self) -> T {
        collapse_coupling(self.r)
    }

    /// Absolute coupling strength.
    pub fn g(&self) -> T {
        match self.coupling {
            Coupling::Value(g) => g,
            Coupling::CollapseOffset(eps) => self.g_c() * (T::one() - eps),
            Coupling::Critical => self.g_c(),
        }
    }

    /// `1 - g/g_c`, exact for [`Coupling::CollapseOffset`].
    pub fn collapse_offset(&self) -> T {
        match self.coupling {
            Coupling::Value(g) => T::one() - g * (T::one() + self.r),
            Coupling::CollapseOffset(eps) => eps,
            Coupling::Critical => T::zero(),
        }
    }

    pub fn frame(&self) -> Result<BogoliubovFrame<T>> {
        derive_frame(self)
    }
}

/// Quantities of the squeezing transformation that diagonalizes the photon
/// part of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BogoliubovFrame<T = f64> {
    pub beta_plus: T,
    pub beta_minus: T,
    pub theta: T,
    pub cosh2_theta: T,
    pub sinh2_theta: T,
    pub tanh_theta: T,
    /// `r sinh²θ + cosh²θ`
    pub r1: T,
    /// `r cosh²θ + sinh²θ`
    pub r2: T,
    pub g: T,
    pub g_c: T,
    pub r: T,
}

impl<T: Scalar> BogoliubovFrame<T> {
    /// Distance `2 β+ β-` between adjacent pole lines.
    #[inline]
    pub fn pole_spacing(&self) -> T {
        T::lit(2.0) * self.beta_plus * self.beta_minus
    }

    /// `E_n + 1/2` of the `n`-th pole line.
    #[inline]
    pub fn shifted_pole(&self, n: usize, q: BargmannIndex) -> T {
        T::lit(2.0) * (T::from_usize_lossy(n) + q.value()) * self.beta_plus * self.beta_minus
    }

    #[inline]
    pub fn pole_energy(&self, n: usize, q: BargmannIndex) -> T {
        self.shifted_pole(n, q) - T::lit(0.5)
    }

    /// `tanh θ / (sqrt(r) g) = 2 / (β+ + β-)`, finite also at `g = 0`.
    #[inline]
    pub fn tanh_over_sqrt_r_g(&self) -> T {
        T::lit(2.0) / (self.beta_plus + self.beta_minus)
    }
}

/// Derives the Bogoliubov frame. Requires `0 <= g < g_c`.
pub fn derive_frame<T: Scalar>(p: &ModelParams<T>) -> Result<BogoliubovFrame<T>> {
    p.validate()?;
    let one = T::one();
    let two = T::lit(2.0);
    let r = p.r;
    let g_c = collapse_coupling(r);
    let g = p.g();
    // u = 1 - g (1 + r); β+² = u (2 - u)
    let u = p.collapse_offset();
    if matches!(p.coupling, Coupling::Critical) || u <= T::zero() {
        return Err(Error::CouplingAtOrAboveCritical {
            g: g.to_f64().unwrap_or(f64::NAN),
            g_c: g_c.to_f64().unwrap_or(f64::NAN),
        });
    }
    let beta_plus = (u * (two - u)).sqrt();
    let v = g * (r - one).abs();
    let beta_minus = ((one - v) * (one + v)).sqrt();
    let sum = beta_plus + beta_minus;
    // β- - β+ = 4 r g² / (β+ + β-), free of cancellation
    let diff = T::lit(4.0) * r * g * g / sum;
    let cosh2_theta = sum / (two * beta_plus);
    let sinh2_theta = diff / (two * beta_plus);
    let tanh_theta = two * r.sqrt() * g / sum;
    let theta = tanh_theta.atanh();
    Ok(BogoliubovFrame {
        beta_plus,
        beta_minus,
        theta,
        cosh2_theta,
        sinh2_theta,
        tanh_theta,
        r1: r * sinh2_theta + cosh2_theta,
        r2: r * cosh2_theta + sinh2_theta,
        g,
        g_c,
        r,
    })
}

/// `g_c = 1 / (1 + r)`.
#[inline]
pub fn collapse_coupling<T: Scalar>(r: T) -> T {
    T::one() / (T::one() + r)
}

/// `Δ_c^(q) = 4 q (1 - r) / (1 + r)`; negative for `r > 1`.
#[inline]
pub fn critical_splitting<T: Scalar>(q: BargmannIndex, r: T) -> T {
    T::lit(4.0) * q.value::<T>() * (T::one() - r) / (T::one() + r)
}

/// Energy of the `n`-th pole line, `2 (n + q) β+ β- - 1/2`.
pub fn pole_energy<T: Scalar>(n: usize, p: &ModelParams<T>) -> Result<T> {
    Ok(derive_frame(p)?.pole_energy(n, p.q))
}

/// Level crossing between the ground and first excited state on the lowest
/// pole line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingPoint<T = f64> {
    pub g0: T,
    /// `None` when the closed form is not real.
    pub e0: Option<T>,
    /// `g0 <= g_c` and `E0` real, i.e. `Δ <= Δ_c^(q)`.
    pub inside: bool,
}

/// Closed-form crossing point of the two lowest levels of a subspace.
pub fn crossing_point<T: Scalar>(q: BargmannIndex, delta: T, r: T) -> Result<CrossingPoint<T>> {
    if !(delta > T::zero()) {
        return Err(Error::InvalidParameter { name: "delta", reason: "crossing point needs delta > 0" });
    }
    if !(r >= T::zero() && r < T::one()) {
        return Err(Error::InvalidParameter { name: "r", reason: "crossing point needs 0 <= r < 1" });
    }
    let one = T::one();
    let qv = q.value::<T>();
    let g0 = T::lit(0.5) * (delta / (qv * (one - r * r))).sqrt();
    let delta_c = critical_splitting(q, r);
    let first = one - delta / (T::lit(4.0) * qv) * (one - r) / (one + r);
    // 1 - Δ/Δ_c, exactly zero at the critical splitting
    let second = (delta_c - delta) / delta_c;
    let prod = first * second;
    let e0 = if prod >= T::zero() {
        Some(T::lit(2.0) * qv * prod.sqrt() - T::lit(0.5))
    } else {
        None
    };
    let inside = delta <= delta_c && e0.is_some();
    Ok(CrossingPoint { g0, e0, inside })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64, r: f64, g: f64) -> ModelParams {
        ModelParams::new(delta, r, g, BargmannIndex::Quarter, Parity::Even).unwrap()
    }

    #[test]
    fn frame_reference_values() {
        // direct evaluation of sqrt(1 - g²(r ± 1)²)
        let f = derive_frame(&params(0.5, 0.2, 0.2)).unwrap();
        assert!((f.beta_plus - (1.0f64 - 0.04 * 1.44).sqrt()).abs() < 1e-15);
        assert!((f.beta_plus - 0.970_772_887_960_927_8).abs() < 1e-12);
        assert!((f.beta_minus - 0.987_117_014_340_245_3).abs() < 1e-12);
    }

    #[test]
    fn frame_at_zero_coupling() {
        for r in [0.0, 0.3, 1.0, 2.5] {
            let f = derive_frame(&params(0.5, r, 0.0)).unwrap();
            assert_eq!(f.beta_plus, 1.0);
            assert_eq!(f.beta_minus, 1.0);
            assert_eq!(f.theta, 0.0);
            assert_eq!(f.tanh_theta, 0.0);
        }
    }

    #[test]
    fn isotropic_frame() {
        for g in [0.1, 0.3, 0.45] {
            let f = derive_frame(&params(0.5, 1.0, g)).unwrap();
            assert_eq!(f.beta_minus, 1.0);
            assert!((f.beta_plus - (1.0 - 4.0 * g * g).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_identities() {
        for &(r, g) in &[(0.2, 0.2), (0.25, 0.7), (0.9, 0.5), (2.0, 0.3)] {
            let f = derive_frame(&params(0.5, r, g)).unwrap();
            let eps = f64::EPSILON * f.cosh2_theta;
            assert!((f.cosh2_theta - f.sinh2_theta - 1.0).abs() <= 4.0 * eps);
            let ch = f.cosh2_theta.sqrt();
            let expect = ((f.beta_plus + f.beta_minus) / (2.0 * f.beta_plus)).sqrt();
            assert!((ch - expect).abs() <= 4.0 * f64::EPSILON * expect);
            assert!((f.tanh_theta - f.theta.tanh()).abs() < 1e-14);
            assert!((f.tanh_theta * f.tanh_theta - f.sinh2_theta / f.cosh2_theta).abs() < 1e-14);
            assert!(f.tanh_theta >= 0.0 && f.tanh_theta < 1.0);
        }
    }

    #[test]
    fn frame_rejects_collapse() {
        let p = params(0.5, 0.25, 0.8);
        assert!(matches!(derive_frame(&p), Err(Error::CouplingAtOrAboveCritical { .. })));
        let p = params(0.5, 0.25, 0.81);
        assert!(matches!(derive_frame(&p), Err(Error::CouplingAtOrAboveCritical { .. })));
        let p = ModelParams::with_coupling(0.5, 0.25, Coupling::Critical, BargmannIndex::Quarter, Parity::Even)
            .unwrap();
        assert!(matches!(derive_frame(&p), Err(Error::CouplingAtOrAboveCritical { .. })));
    }

    #[test]
    fn frame_degenerates_monotonically() {
        let base = params(0.5, 0.25, 0.1);
        let mut last = derive_frame(&base).unwrap();
        for k in 1..40 {
            let eps = 10f64.powf(-(k as f64) * 0.5);
            let f = derive_frame(&base.near_collapse(eps).unwrap()).unwrap();
            assert!(f.beta_plus < last.beta_plus);
            assert!(f.tanh_theta >= last.tanh_theta);
            last = f;
        }
        assert!(last.beta_plus < 1e-9);
        assert!(1.0 - last.tanh_theta < 1e-9);
    }

    #[test]
    fn collapse_couplings() {
        assert_eq!(collapse_coupling(0.25), 0.8);
        assert_eq!(collapse_coupling(0.0), 1.0);
        assert_eq!(collapse_coupling(1.0), 0.5);
    }

    #[test]
    fn critical_splittings() {
        assert!((critical_splitting::<f64>(BargmannIndex::Quarter, 0.25) - 0.6).abs() < 1e-15);
        assert!((critical_splitting::<f64>(BargmannIndex::ThreeQuarters, 0.25) - 1.8).abs() < 1e-15);
        assert_eq!(critical_splitting(BargmannIndex::Quarter, 1.0), 0.0);
        assert!(critical_splitting(BargmannIndex::Quarter, 2.0) < 0.0);
    }

    #[test]
    fn pole_energies() {
        for n in 0..10 {
            let p = params(0.5, 0.3, 0.0);
            assert_eq!(pole_energy(n, &p).unwrap(), 2.0 * n as f64);
            let p = p.with_q(BargmannIndex::ThreeQuarters);
            assert_eq!(pole_energy(n, &p).unwrap(), 2.0 * n as f64 + 1.0);
        }
        let e0 = pole_energy(0, &params(0.5, 0.2, 0.2)).unwrap();
        let expect = 2.0 * 0.25 * 0.970_772_887_960_927_8 * 0.987_117_014_340_245_3 - 0.5;
        assert!((e0 - expect).abs() < 1e-14);
        assert!((e0 - (-0.020_88)).abs() < 1e-4);
    }

    #[test]
    fn pole_spacing_is_uniform() {
        let p = params(0.5, 0.37, 0.41);
        let f = derive_frame(&p).unwrap();
        for n in 0..50 {
            let d = f.pole_energy(n + 1, p.q) - f.pole_energy(n, p.q);
            assert!((d - f.pole_spacing()).abs() <= 4.0 * f64::EPSILON * (2.0 * n as f64 + 2.0));
        }
    }

    #[test]
    fn crossing_point_at_critical_splitting() {
        for r in [0.1, 0.25, 0.5, 0.9] {
            for q in BargmannIndex::ALL {
                let dc = critical_splitting::<f64>(q, r);
                let c = crossing_point(q, dc, r).unwrap();
                assert!((c.g0 - collapse_coupling::<f64>(r)).abs() < 1e-12);
                assert!((c.e0.unwrap() + 0.5).abs() < 1e-12);
                assert!(c.inside);
            }
        }
    }

    #[test]
    fn crossing_point_closed_form() {
        let c = crossing_point::<f64>(BargmannIndex::Quarter, 0.5, 0.2).unwrap();
        assert!((c.g0 - 0.721_687_836_487_032_2).abs() < 1e-12);
        assert!(c.inside);
        // E0 equals the lowest pole energy at g0
        let p = params(0.5, 0.2, c.g0);
        assert!((c.e0.unwrap() - pole_energy(0, &p).unwrap()).abs() < 1e-13);
        let tiny = crossing_point(BargmannIndex::Quarter, 1e-12, 0.4).unwrap();
        assert!(tiny.g0 < 1e-5);
        let outside = crossing_point(BargmannIndex::Quarter, 0.7, 0.25).unwrap();
        assert!(!outside.inside);
        assert!(outside.e0.is_none());
    }

    #[test]
    fn generic_scalar_f32() {
        let p = ModelParams::<f32>::new(0.5, 0.2, 0.2, BargmannIndex::Quarter, Parity::Even).unwrap();
        let f = derive_frame(&p).unwrap();
        assert!((f.beta_plus - 0.970_772_9).abs() < 1e-6);
    }
}
