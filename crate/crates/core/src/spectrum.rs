//! Level finding from G-function zeros, degenerate points from `F_n`, and
//! bound-state counting through the exceptional G-function.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gfunction::{default_truncation, eval_f_coupling, eval_exceptional_sums, eval_g_exceptional, eval_sums, DEFAULT_TOL};
use crate::model::{collapse_coupling, BargmannIndex, Coupling, ModelParams, Parity};
use crate::recurrence::pole_tolerance;
use crate::roots::{bisect, chebyshev_nodes, sign_changes};

/// Lower end of the default scan window, `-1/2 - 5`.
pub const DEFAULT_E_FLOOR: f64 = -5.5;

/// Initial samples per pole interval.
pub const INITIAL_SAMPLES: usize = 64;

const MAX_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    pub q: BargmannIndex,
    pub parity: Parity,
    /// `n` such that `E_{n-1}^pole < E < E_n^pole`; 0 means below the
    /// lowest pole line.
    pub pole_interval: usize,
    /// Set for a level sitting on a pole line as a degenerate pair.
    pub degenerate_with: Option<Parity>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelDiagnostics {
    pub min_truncation: usize,
    pub max_truncation: usize,
    /// Pole intervals whose sign pattern did not stabilize.
    pub unresolved: Vec<usize>,
    /// `(interval, parity, count)` for intervals holding more than one root
    /// of one parity.
    pub multiple_roots: Vec<(usize, Parity, usize)>,
    /// Root polishes that ended on an unconverged series.
    pub unconverged: usize,
}

#[derive(Clone, Debug)]
pub struct LevelSet {
    pub params: ModelParams,
    pub levels: Vec<EnergyLevel>,
    pub diagnostics: LevelDiagnostics,
}

impl LevelSet {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn with_parity(&self, parity: Parity) -> Vec<f64> {
        self.levels.iter().filter(|l| l.parity == parity).map(|l| l.energy).collect()
    }
}

/// Options of [`find_levels`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSearch {
    pub e_min: f64,
    pub e_max: f64,
    /// Fixed truncation; `None` uses `max(2 N*, 1000)` per energy.
    pub truncation: Option<usize>,
    /// Absolute energy tolerance of the polished roots.
    pub tol: f64,
    /// Relative tolerance of the series sums.
    pub series_tol: f64,
}

impl LevelSearch {
    pub fn new(e_max: f64) -> Self {
        Self { e_min: DEFAULT_E_FLOOR, e_max, truncation: None, tol: 1e-12, series_tol: DEFAULT_TOL }
    }
}

/// All zeros of `G_+` and `G_-` of the subspace `p.q` inside
/// `(search.e_min, search.e_max)`, one pole interval at a time.
pub fn find_levels(p: &ModelParams, search: &LevelSearch) -> Result<LevelSet> {
    let frame = p.frame()?;
    let q = p.q;
    let mut diag = LevelDiagnostics { min_truncation: usize::MAX, ..Default::default() };
    let mut levels = Vec::new();
    let mut n = 0usize;
    loop {
        let upper = frame.pole_energy(n, q);
        let lower = if n == 0 { search.e_min } else { frame.pole_energy(n - 1, q) };
        if lower >= search.e_max {
            break;
        }
        let a = lower.max(search.e_min);
        let b = upper.min(search.e_max);
        if b > a {
            scan_interval(p, search, n, a, b, &mut levels, &mut diag)?;
        }
        n += 1;
    }
    if diag.min_truncation == usize::MAX {
        diag.min_truncation = 0;
    }
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(LevelSet { params: *p, levels, diagnostics: diag })
}

fn sums_at(p: &ModelParams, e: f64, search: &LevelSearch, diag: &mut LevelDiagnostics) -> Result<(f64, f64)> {
    let n = match search.truncation {
        Some(n) => n,
        None => default_truncation(p, e)?,
    };
    let s = eval_sums(p, e, n, search.series_tol)?;
    diag.min_truncation = diag.min_truncation.min(s.terms);
    diag.max_truncation = diag.max_truncation.max(s.terms);
    Ok((s.g(Parity::Even), s.g(Parity::Odd)))
}

fn scan_interval(
    p: &ModelParams,
    search: &LevelSearch,
    n: usize,
    a: f64,
    b: f64,
    levels: &mut Vec<EnergyLevel>,
    diag: &mut LevelDiagnostics,
) -> Result<()> {
    let mut m = INITIAL_SAMPLES;
    let mut history: Vec<[usize; 2]> = Vec::new();
    let mut samples;
    let mut values: [Vec<f64>; 2];
    loop {
        samples = chebyshev_nodes(a, b, m);
        values = [Vec::with_capacity(m), Vec::with_capacity(m)];
        for &e in &samples {
            let (plus, minus) = match sums_at(p, e, search, diag) {
                Ok(v) => v,
                Err(Error::PoleProximity { .. }) => (f64::NAN, f64::NAN),
                Err(err) => return Err(err),
            };
            values[0].push(plus);
            values[1].push(minus);
        }
        let counts = [sign_changes(&values[0]).len(), sign_changes(&values[1]).len()];
        history.push(counts);
        let k = history.len();
        if k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3] {
            break;
        }
        if 2 * m > MAX_SAMPLES {
            diag.unresolved.push(n);
            break;
        }
        m *= 2;
    }
    for (slot, parity) in [Parity::Even, Parity::Odd].into_iter().enumerate() {
        let changes = sign_changes(&values[slot]);
        if changes.len() > 1 {
            diag.multiple_roots.push((n, parity, changes.len()));
        }
        for i in changes {
            let pp = p.with_parity(parity);
            let mut unconverged = false;
            let f = |e: f64| -> Result<f64> {
                let trunc = match search.truncation {
                    Some(t) => t,
                    None => default_truncation(&pp, e)?,
                };
                let s = eval_sums(&pp, e, trunc, search.series_tol)?;
                unconverged = !s.converged;
                Ok(s.g(parity))
            };
            let e = bisect(f, samples[i], samples[i + 1], values[slot][i], values[slot][i + 1], search.tol)?;
            if unconverged {
                diag.unconverged += 1;
            }
            levels.push(EnergyLevel { energy: e, q: p.q, parity, pole_interval: n, degenerate_with: None });
        }
    }
    Ok(())
}

/// Adds the doubly degenerate levels that sit exactly on pole lines for the
/// coupling of `set`, taken from degenerate points within `g_tol`.
pub fn mark_degenerate(set: &mut LevelSet, points: &[DegeneratePoint], g_tol: f64) -> Result<()> {
    let frame = set.params.frame()?;
    let g = frame.g;
    for dp in points.iter().filter(|d| d.q == set.params.q && (d.g_value - g).abs() <= g_tol) {
        let e = frame.pole_energy(dp.n, dp.q);
        let tau = pole_tolerance(e);
        if set.levels.iter().any(|l| (l.energy - e).abs() <= tau && l.degenerate_with.is_some()) {
            continue;
        }
        for parity in Parity::ALL {
            set.levels.push(EnergyLevel {
                energy: e,
                q: dp.q,
                parity,
                pole_interval: dp.n + 1,
                degenerate_with: Some(parity.flip()),
            });
        }
    }
    set.levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(())
}

/// A doubly degenerate level on the `n`-th pole line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegeneratePoint {
    pub n: usize,
    pub g_value: f64,
    pub energy: f64,
    pub q: BargmannIndex,
}

/// Sample offsets `1 - g/g_c` covering `[eps_lo, eps_hi]`: `m` uniform
/// points in `g` plus a geometric ladder toward `g_c`.
fn offset_samples(eps_lo: f64, eps_hi: f64, m: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=m).map(|i| eps_hi + (eps_lo - eps_hi) * i as f64 / m as f64).collect();
    let mut e = eps_hi.min(0.1);
    while e > eps_lo {
        out.push(e);
        e *= 10f64.powf(-0.125);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup();
    out
}

/// Every sign-change root of `F_n(g)` in `g_range`, polished to `tol` in
/// `g`. The scan is done in `1 - g/g_c` so roots close to the collapse
/// point keep full relative precision.
pub fn find_degenerate_points(
    delta: f64,
    r: f64,
    q: BargmannIndex,
    n: usize,
    g_range: (f64, f64),
    tol: f64,
) -> Result<Vec<DegeneratePoint>> {
    let g_c = collapse_coupling(r);
    let (g_lo, g_hi) = g_range;
    if !(g_lo >= 0.0 && g_lo < g_hi && g_hi < g_c) {
        return Err(Error::InvalidParameter { name: "g_range", reason: "need 0 <= g_lo < g_hi < g_c" });
    }
    // F_n needs g > 0
    let eps_hi = 1.0 - g_lo.max(1e-9 * g_c) / g_c;
    let eps_lo = 1.0 - g_hi / g_c;
    let f = |eps: f64| eval_f_coupling(delta, r, q, n, Coupling::CollapseOffset(eps));
    let mut m = 256;
    let mut history = Vec::new();
    let (mut xs, mut vs);
    loop {
        xs = offset_samples(eps_lo, eps_hi, m);
        vs = xs.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
        history.push(sign_changes(&vs).len());
        let k = history.len();
        if (k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3]) || m >= 8192 {
            break;
        }
        m *= 2;
    }
    let mut out = Vec::new();
    for i in sign_changes(&vs) {
        let eps = bisect(f, xs[i], xs[i + 1], vs[i], vs[i + 1], tol / g_c)?;
        let p = ModelParams::with_coupling(delta, r, Coupling::CollapseOffset(eps), q, Parity::Even)?;
        let frame = p.frame()?;
        out.push(DegeneratePoint { n, g_value: g_c * (1.0 - eps), energy: frame.pole_energy(n, q), q });
    }
    out.sort_by(|a, b| a.g_value.total_cmp(&b.g_value));
    Ok(out)
}

/// Largest root of `F_n` below `g_c`.
pub fn last_crossing(delta: f64, r: f64, q: BargmannIndex, n: usize, tol: f64) -> Result<f64> {
    let g_c = collapse_coupling(r);
    let pts = find_degenerate_points(delta, r, q, n, (0.0, g_c * (1.0 - 1e-12)), tol)?;
    pts.last().map(|d| d.g_value).ok_or(Error::NoCrossing { n })
}

/// Zeros of the exceptional G-function found at one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalZeros {
    pub truncation: usize,
    /// Zero positions as `x = -log10(1 - g/g_c)`, ascending.
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    /// The truncated series has converged at the zero (tail below
    /// [`RESOLVED_TAIL`] relative). Unresolved zeros still move with the
    /// truncation.
    pub resolved: Vec<bool>,
}

impl ExceptionalZeros {
    pub fn count(&self) -> usize {
        self.x.len()
    }

    pub fn resolved_x(&self) -> Vec<f64> {
        self.x.iter().zip(&self.resolved).filter(|(_, r)| **r).map(|(x, _)| *x).collect()
    }
}

pub const RESOLVED_TAIL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalScan {
    pub per_truncation: Vec<ExceptionalZeros>,
    /// The probe ladder went past `1 - g/g_c = 1e-15`, where the frame is
    /// no longer trustworthy in double precision.
    pub precision_floor: bool,
}

/// Evaluates the exceptional G-function at `x = -log10(1 - g/g_c)`.
pub fn exceptional_at(p: &ModelParams, m: usize, x: f64, truncation: usize, tol: f64) -> Result<f64> {
    let pp = p.near_collapse(10f64.powf(-x))?;
    Ok(eval_g_exceptional(&pp, m, truncation, tol)?.value)
}

/// Polishes sign changes of sampled exceptional-G values into zeros.
pub fn refine_exceptional_zeros(
    p: &ModelParams,
    m: usize,
    xs: &[f64],
    values: &[f64],
    truncation: usize,
    x_tol: f64,
) -> Result<ExceptionalZeros> {
    let g_c = p.g_c();
    let mut x = Vec::new();
    for i in sign_changes(values) {
        let f = |xx: f64| exceptional_at(p, m, xx, truncation, 0.0);
        x.push(bisect(f, xs[i], xs[i + 1], values[i], values[i + 1], x_tol)?);
    }
    let g = x.iter().map(|&xx| g_c * (1.0 - 10f64.powf(-xx))).collect();
    let resolved = x
        .iter()
        .map(|&xx| {
            let s = eval_exceptional_sums(&p.near_collapse(10f64.powf(-xx))?, m, truncation, 0.0)?;
            Ok(s.tail_estimate <= RESOLVED_TAIL * s.lambda.abs().max(s.xi.abs()).max(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExceptionalZeros { truncation, x, g, resolved })
}

/// Counts zeros of the exceptional G-function on pole line `m` over the
/// probe ladder `xs` (values of `-log10(1 - g/g_c)`), once per truncation.
/// The series is summed to exactly the requested number of terms so the
/// counts reflect the truncation, as they may grow with it.
pub fn count_bound_states_via_exceptional(
    p: &ModelParams,
    m: usize,
    xs: &[f64],
    truncations: &[usize],
    x_tol: f64,
) -> Result<ExceptionalScan> {
    let precision_floor = xs.iter().any(|&x| x > 15.0);
    let mut per_truncation = Vec::with_capacity(truncations.len());
    for &n in truncations {
        let values = xs.iter().map(|&x| exceptional_at(p, m, x, n, 0.0)).collect::<Result<Vec<_>>>()?;
        per_truncation.push(refine_exceptional_zeros(p, m, xs, &values, n, x_tol)?);
    }
    Ok(ExceptionalScan { per_truncation, precision_floor })
}

/// Least-squares fit of `-ln(1 - g_m/g_c) = μ m - μ0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFit {
    pub mu: f64,
    pub mu0: f64,
    /// Root-mean-square residual in `-ln(1 - g/g_c)`.
    pub residual: f64,
    pub max_residual: f64,
}

/// Fits zeros given by their offsets `1 - g_m/g_c`, labelled
/// `m = first_index, first_index + 1, ...`.
pub fn fit_exponential_offsets(offsets: &[f64], first_index: usize) -> Result<ExponentialFit> {
    if offsets.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: offsets.len() });
    }
    let n = offsets.len() as f64;
    let ms: Vec<f64> = (0..offsets.len()).map(|i| (first_index + i) as f64).collect();
    let ys: Vec<f64> = offsets.iter().map(|e| -e.ln()).collect();
    let mx = ms.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ms.iter().zip(&ys).map(|(m, y)| (m - mx) * (y - my)).sum();
    let sxx: f64 = ms.iter().map(|m| (m - mx) * (m - mx)).sum();
    let mu = sxy / sxx;
    let mu0 = mu * mx - my;
    let res: Vec<f64> = ms.iter().zip(&ys).map(|(m, y)| y - (mu * m - mu0)).collect();
    let residual = (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let max_residual = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Ok(ExponentialFit { mu, mu0, residual, max_residual })
}

/// Same fit from absolute couplings `g_m`.
pub fn fit_exponential_spacing(zeros: &[f64], g_c: f64, first_index: usize) -> Result<ExponentialFit> {
    let offsets: Vec<f64> = zeros.iter().map(|g| 1.0 - g / g_c).collect();
    fit_exponential_offsets(&offsets, first_index)
}

/// `E' = (E + 1/2) / (2 β+ β-) - q`, which maps pole lines onto integers.
pub fn scale_energy(e: f64, p: &ModelParams) -> Result<f64> {
    let f = p.frame()?;
    Ok((e + 0.5) / f.pole_spacing() - p.q.as_f64())
}

pub fn scale_spectrum(levels: &[EnergyLevel], p: &ModelParams) -> Result<Vec<f64>> {
    let f = p.frame()?;
    Ok(levels.iter().map(|l| (l.energy + 0.5) / f.pole_spacing() - l.q.as_f64()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::crossing_point;

    #[test]
    fn scaled_poles_are_integers() {
        let p = ModelParams::new(0.5, 0.25, 0.6, BargmannIndex::ThreeQuarters, Parity::Even).unwrap();
        let f = p.frame().unwrap();
        for n in 0..10 {
            let e = scale_energy(f.pole_energy(n, p.q), &p).unwrap();
            assert!((e - n as f64).abs() < 1e-12);
        }
        let p0 = ModelParams::new(0.5, 0.25, 0.0, BargmannIndex::Quarter, Parity::Even).unwrap();
        assert_eq!(scale_energy(4.0, &p0).unwrap(), 2.0);
    }

    #[test]
    fn synthetic_exponential_fit() {
        let g_c = 0.8;
        let zeros: Vec<f64> = (1..8).map(|m| g_c * (1.0 - (-0.9 * m as f64 + 0.1).exp())).collect();
        let fit = fit_exponential_spacing(&zeros, g_c, 1).unwrap();
        assert!((fit.mu - 0.9).abs() < 1e-9);
        assert!((fit.mu0 - 0.1).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
        assert!(matches!(
            fit_exponential_spacing(&zeros[..2], g_c, 1),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn zero_coupling_levels() {
        for q in BargmannIndex::ALL {
            let p = ModelParams::new(0.5, 0.3, 0.0, q, Parity::Even).unwrap();
            let set = find_levels(&p, &LevelSearch { e_min: -1.0, ..LevelSearch::new(7.0) }).unwrap();
            let off = q.offset() as f64;
            let mut expect: Vec<f64> = (0..5)
                .flat_map(|l| [2.0 * l as f64 + off - 0.25, 2.0 * l as f64 + off + 0.25])
                .filter(|e| *e < 7.0)
                .collect();
            expect.sort_by(f64::total_cmp);
            let got = set.energies();
            assert_eq!(got.len(), expect.len(), "{got:?}");
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lowest_degenerate_point_is_crossing_point() {
        let (delta, r) = (0.5, 0.2);
        let q = BargmannIndex::Quarter;
        let g_c = collapse_coupling(r);
        let pts = find_degenerate_points(delta, r, q, 0, (0.0, 0.999 * g_c), 1e-13).unwrap();
        assert_eq!(pts.len(), 1);
        let g0 = crossing_point(q, delta, r).unwrap().g0;
        assert!((pts[0].g_value - g0).abs() < 1e-10);
        assert!(find_degenerate_points(0.7, 0.25, q, 0, (0.0, 0.999 * 0.8), 1e-12).unwrap().is_empty());
    }
}
