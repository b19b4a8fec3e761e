//! Exact diagonalization in a truncated Fock basis.
//!
//! Within one Bargmann subspace the basis is `{|↑,k⟩, |↓,k⟩}` with
//! `k = 2l + 2(q - 1/4)`, ordered `|↑,k_0⟩, |↓,k_0⟩, |↑,k_1⟩, ...`. The
//! Hamiltonian then has bandwidth 3.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpairs, min_eigenvalue, SymBand};
use crate::model::{critical_splitting, BargmannIndex, ModelParams, Parity};

/// Residual target `‖Hv - λv‖ <= RESIDUAL ‖H‖`.
pub const RESIDUAL: f64 = 1e-10;

/// `|⟨Π⟩|` below this marks a state as parity-ambiguous.
pub const PARITY_THRESHOLD: f64 = 0.99;

/// Default number of retained basis vectors per subspace.
pub const DEFAULT_DIM: usize = 2000;

#[derive(Clone, Debug)]
pub struct FockHamiltonian {
    pub dimension: usize,
    pub q: BargmannIndex,
    pub delta: f64,
    pub r: f64,
    pub g: f64,
    pub matrix: SymBand,
}

impl FockHamiltonian {
    /// Photon number of basis vector `i`.
    pub fn photons(&self, i: usize) -> usize {
        2 * (i / 2) + self.q.offset()
    }

    pub fn is_spin_up(&self, i: usize) -> bool {
        i % 2 == 0
    }

    /// Eigenvalue of the parity operator on basis vector `i`, with the
    /// phase `i^{-2(q-1/4)}` removed so it is real in both subspaces:
    /// `(-1)^⌊k/2⌋` for spin up and `-(-1)^⌊k/2⌋` for spin down.
    pub fn basis_parity(&self, i: usize) -> f64 {
        let k = self.photons(i);
        let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if self.is_spin_up(i) {
            s
        } else {
            -s
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(v)
    }

    pub fn apply_parity(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(i, x)| self.basis_parity(i) * x).collect()
    }
}

/// Builds the truncated Hamiltonian of the subspace `p.q`. `dim` is the
/// number of retained basis vectors (rounded down to even, at least 4).
pub fn build_hamiltonian(p: &ModelParams, dim: usize) -> Result<FockHamiltonian> {
    p.validate()?;
    if dim < 4 {
        return Err(Error::InvalidParameter { name: "dim", reason: "need at least 4 basis vectors" });
    }
    let dim = dim - dim % 2;
    let levels = dim / 2;
    let g = p.g();
    let off = p.q.offset();
    let mut m = SymBand::zeros(dim, 3);
    for l in 0..levels {
        let k = (2 * l + off) as f64;
        m.set(2 * l, 2 * l, k + 0.5 * p.delta);
        m.set(2 * l + 1, 2 * l + 1, k - 0.5 * p.delta);
        if l + 1 < levels {
            let amp = ((k + 1.0) * (k + 2.0)).sqrt();
            // ↑k with ↓k+2 through σ+ a², ↑k+2 with ↓k through (a†)² σ+
            m.set(2 * l, 2 * l + 3, g * amp);
            m.set(2 * l + 2, 2 * l + 1, p.r * g * amp);
        }
    }
    Ok(FockHamiltonian { dimension: dim, q: p.q, delta: p.delta, r: p.r, g, matrix: m })
}

#[derive(Clone, Debug)]
pub struct EDResult {
    pub eigenvalues: Vec<f64>,
    /// `None` when `|⟨Π⟩| < 0.99`.
    pub parities: Vec<Option<Parity>>,
    pub parity_expectations: Vec<f64>,
    pub residuals: Vec<f64>,
    pub dimension: usize,
    pub q: BargmannIndex,
    /// Largest shift of the watched eigenvalues under the last dimension
    /// doubling, when one was performed.
    pub truncation_shift: Option<f64>,
    /// `g > 0.95 g_c`: truncation artifacts bend the levels near collapse.
    pub near_collapse: bool,
}

impl EDResult {
    /// Eigenvalues carrying a definite parity label equal to `parity`.
    pub fn levels_with_parity(&self, parity: Parity) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.parities)
            .filter(|(_, p)| **p == Some(parity))
            .map(|(e, _)| *e)
            .collect()
    }
}

/// Parity of a normalized eigenvector of `h`.
pub fn parity_expectation(h: &FockHamiltonian, v: &[f64]) -> Result<Parity> {
    let e = raw_parity(h, v);
    if e.abs() > PARITY_THRESHOLD {
        Ok(if e > 0.0 { Parity::Even } else { Parity::Odd })
    } else {
        Err(Error::AmbiguousParity { expectation: e })
    }
}

fn raw_parity(h: &FockHamiltonian, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, x)| h.basis_parity(i) * x * x).sum()
}

/// The `k_lowest` eigenvalues of `h` with parity labels.
pub fn diagonalize(h: &FockHamiltonian, k_lowest: usize) -> Result<EDResult> {
    if k_lowest > h.dimension {
        return Err(Error::InvalidParameter { name: "k_lowest", reason: "exceeds the basis dimension" });
    }
    let pairs = lowest_eigenpairs(&h.matrix, k_lowest, RESIDUAL)?;
    let mut parities = Vec::with_capacity(k_lowest);
    let mut expectations = Vec::with_capacity(k_lowest);
    for v in &pairs.vectors {
        expectations.push(raw_parity(h, v));
        parities.push(parity_expectation(h, v).ok());
    }
    let g_c = 1.0 / (1.0 + h.r);
    Ok(EDResult {
        eigenvalues: pairs.values,
        parities,
        parity_expectations: expectations,
        residuals: pairs.residuals,
        dimension: h.dimension,
        q: h.q,
        truncation_shift: None,
        near_collapse: h.g > 0.95 * g_c,
    })
}

/// Diagonalizes at `dim`, `2 dim`, ... until the `k_lowest` eigenvalues
/// move by less than `shift_tol`, or `max_dim` is exceeded.
pub fn diagonalize_converged(
    p: &ModelParams,
    dim: usize,
    k_lowest: usize,
    shift_tol: f64,
    max_dim: usize,
) -> Result<EDResult> {
    let mut dim = dim.max(2 * k_lowest).max(4);
    let mut prev = diagonalize(&build_hamiltonian(p, dim)?, k_lowest)?;
    loop {
        let next_dim = 2 * dim;
        if next_dim > max_dim {
            return Ok(prev);
        }
        let mut next = diagonalize(&build_hamiltonian(p, next_dim)?, k_lowest)?;
        let shift = prev
            .eigenvalues
            .iter()
            .zip(&next.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        next.truncation_shift = Some(shift);
        if shift < shift_tol {
            return Ok(next);
        }
        prev = next;
        dim = next_dim;
    }
}

/// Closed-form spectrum of one subspace at `r = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RwaSpectrum {
    /// `|↓, 2(q-1/4)⟩`, which has no rotating-wave partner.
    pub isolated: f64,
    /// `(E_n^-, E_n^+)` of the pair `|↑,k⟩, |↓,k+2⟩`, `k = 2n + 2(q-1/4)`.
    pub pairs: Vec<(f64, f64)>,
}

impl RwaSpectrum {
    /// All energies, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = core::iter::once(self.isolated).chain(self.pairs.iter().flat_map(|&(a, b)| [a, b])).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// `E_n = k + 1 ± sqrt((1 - Δ/2)² + g² (k + 1)(k + 2))` with `k = 2n` for
/// `q = 1/4` and `k = 2n + 1` for `q = 3/4`, `n = 0..=n_max`.
pub fn rwa_spectrum(delta: f64, g: f64, q: BargmannIndex, n_max: usize) -> RwaSpectrum {
    let off = q.offset() as f64;
    let pairs = (0..=n_max)
        .map(|n| {
            let k = 2.0 * n as f64 + off;
            let rad = ((1.0 - 0.5 * delta).powi(2) + g * g * (k + 1.0) * (k + 2.0)).sqrt();
            (k + 1.0 - rad, k + 1.0 + rad)
        })
        .collect();
    RwaSpectrum { isolated: off - 0.5 * delta, pairs }
}

/// Truncation of `H_0 = [[x², κ i x p], [-κ i p x, p²]]`, `κ = Δ_c^(1/4)`,
/// in one Fock-parity sector (`n ≡ sector mod 2`, `n < dim`).
pub fn collapse_hamiltonian(r: f64, dim: usize, sector: usize) -> SymBand {
    let kappa = critical_splitting::<f64>(BargmannIndex::Quarter, r);
    let ns: Vec<usize> = (0..dim).filter(|n| n % 2 == sector).collect();
    let m = ns.len();
    let mut a = SymBand::zeros(2 * m, 3);
    for (l, &n) in ns.iter().enumerate() {
        let nf = n as f64;
        let up = 2 * l;
        let dn = 2 * l + 1;
        a.set(up, up, nf + 0.5);
        a.set(dn, dn, nf + 0.5);
        // i x p = -(1 + a†² - a²) / 2
        a.set(up, dn, -0.5 * kappa);
        if l + 1 < m {
            let s = ((nf + 1.0) * (nf + 2.0)).sqrt();
            a.set(up + 2, up, 0.5 * s);
            a.set(dn + 2, dn, -0.5 * s);
            // ⟨n+2| B |n⟩ = -κ s/2 and ⟨n| B |n+2⟩ = +κ s/2, B in the upper-right block
            a.set(up + 2, dn, -0.5 * kappa * s);
            a.set(up, dn + 2, 0.5 * kappa * s);
        }
    }
    a
}

/// Smallest eigenvalue of the truncated `H_0` over both Fock-parity
/// sectors. Non-negative up to rounding whenever `0 <= r <= 1`.
pub fn check_positivity(r: f64, dim: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter { name: "r", reason: "positivity check needs 0 <= r <= 1" });
    }
    if dim < 2 {
        return Err(Error::InvalidParameter { name: "dim", reason: "need at least 2 Fock states" });
    }
    Ok([0, 1].iter().map(|&s| min_eigenvalue(&collapse_hamiltonian(r, dim, s))).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64, r: f64, g: f64, q: BargmannIndex) -> ModelParams {
        ModelParams::new(delta, r, g, q, Parity::Even).unwrap()
    }

    #[test]
    fn zero_coupling_levels() {
        for q in BargmannIndex::ALL {
            let h = build_hamiltonian(&params(0.5, 0.3, 0.0, q), 40).unwrap();
            let ed = diagonalize(&h, 10).unwrap();
            let off = q.offset() as f64;
            let mut expect: Vec<f64> =
                (0..20).flat_map(|l| [2.0 * l as f64 + off + 0.25, 2.0 * l as f64 + off - 0.25]).collect();
            expect.sort_by(f64::total_cmp);
            for (a, b) in ed.eigenvalues.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(ed.parities.iter().all(|p| p.is_some()));
        }
    }

    #[test]
    fn spin_up_vacuum_is_even() {
        let h = build_hamiltonian(&params(0.5, 0.3, 0.0, BargmannIndex::Quarter), 10).unwrap();
        let mut v = alloc::vec![0.0; 10];
        v[0] = 1.0;
        assert_eq!(parity_expectation(&h, &v).unwrap(), Parity::Even);
        v[0] = 0.0;
        v[1] = 1.0;
        assert_eq!(parity_expectation(&h, &v).unwrap(), Parity::Odd);
    }

    #[test]
    fn degenerate_spin_doublet_is_ambiguous_or_labelled() {
        // Δ = 0, g = 0: every level is a spin doublet of opposite parities
        let h = build_hamiltonian(&params(0.0, 0.3, 0.0, BargmannIndex::Quarter), 20).unwrap();
        let ed = diagonalize(&h, 6).unwrap();
        for k in 0..3 {
            assert!((ed.eigenvalues[2 * k] - 2.0 * k as f64).abs() < 1e-12);
            assert!((ed.eigenvalues[2 * k + 1] - 2.0 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn commutes_with_parity() {
        let h = build_hamiltonian(&params(0.7, 0.3, 0.4, BargmannIndex::ThreeQuarters), 60).unwrap();
        let v: Vec<f64> = (0..60).map(|i| ((i * 13 % 7) as f64 - 3.0) * 0.1).collect();
        let hp = h.apply(&h.apply_parity(&v));
        let ph = h.apply_parity(&h.apply(&v));
        for (a, b) in hp.iter().zip(&ph) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rwa_examples() {
        let s = rwa_spectrum(1.0, 1.0, BargmannIndex::Quarter, 1);
        assert!((s.pairs[0].0 + 0.5).abs() < 1e-14 && (s.pairs[0].1 - 2.5).abs() < 1e-14);
        assert!((s.pairs[1].0 + 0.5).abs() < 1e-14 && (s.pairs[1].1 - 6.5).abs() < 1e-14);
        let s = rwa_spectrum(0.6, 0.0, BargmannIndex::Quarter, 3);
        for (n, &(a, b)) in s.pairs.iter().enumerate() {
            let k = 2.0 * n as f64;
            assert!((a - (k + 1.0 - 0.7)).abs() < 1e-14);
            assert!((b - (k + 1.0 + 0.7)).abs() < 1e-14);
        }
    }

    #[test]
    fn rwa_matches_ed() {
        for q in BargmannIndex::ALL {
            let ed = diagonalize(&build_hamiltonian(&params(0.8, 0.0, 0.6, q), 400).unwrap(), 12).unwrap();
            let rwa = rwa_spectrum(0.8, 0.6, q, 300).energies();
            for (a, b) in ed.eigenvalues.iter().zip(&rwa) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn collapse_hamiltonian_positivity() {
        assert!(check_positivity(1.0, 200).unwrap() >= -1e-10);
        assert!(check_positivity(0.25, 200).unwrap() >= -1e-10);
        assert!(check_positivity(0.0, 200).unwrap().abs() < 1e-6);
    }
}
