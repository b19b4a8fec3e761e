//! One function per subcommand, each producing a [`Table`].

use rayon::prelude::*;
use thiserror::Error;
use tprabi_core::collapse::{
    brownstein_i2_with_error, faddeev_i1, solve_bound_states, CollapseGrid, CountClass, FaddeevI1, Region,
};
use tprabi_core::fock::diagonalize_converged;
use tprabi_core::gfunction::{default_truncation, eval_sums};
use tprabi_core::model::{collapse_coupling, critical_splitting};
use tprabi_core::recurrence::run_rescaled;
use tprabi_core::spectrum::{
    exceptional_at, find_degenerate_points, find_levels, fit_exponential_offsets, refine_exceptional_zeros,
    scale_energy, ExceptionalZeros, LevelSearch,
};
use tprabi_core::{BargmannIndex, Error as CoreError, ModelParams, Parity};

use crate::config::{parity_label, q_label, Command, RunConfig};
use crate::output::{Cell, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Core { context: String, source: CoreError },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

type Result<T> = std::result::Result<T, RunError>;

trait Context<T> {
    fn context(self, f: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, f: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| RunError::Core { context: f(), source })
    }
}

/// Runs the configured command on a pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig) -> Result<Table> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    pool.install(|| match cfg.command {
        Command::Gcurve => gcurve(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Degenerate => degenerate(cfg),
        Command::Exceptional => exceptional(cfg),
        Command::Collapse => collapse(cfg),
        Command::Ed => ed(cfg),
        Command::Coeffs => coeffs(cfg),
    })
}

fn params(cfg: &RunConfig, g: f64, q: BargmannIndex) -> Result<ModelParams> {
    ModelParams::new(cfg.delta, cfg.r, g, q, Parity::Even).context(|| format!("parameters at g = {g}"))
}

/// G± along `e_range`; energies inside a pole's rejection radius are skipped.
fn gcurve(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["q", "E", "G_plus", "G_minus", "pole_distance", "terms", "converged"]);
    for q in cfg.subspaces() {
        let p = params(cfg, cfg.g, q)?;
        let energies = cfg.e_range.values();
        let rows: Vec<Option<Vec<(&'static str, Cell)>>> = energies
            .par_iter()
            .map(|&e| {
                let n = match cfg.trunc.first() {
                    Some(&n) => n,
                    None => match default_truncation(&p, e) {
                        Ok(n) => n,
                        Err(CoreError::PoleProximity { .. }) => return Ok(None),
                        Err(err) => return Err(err).context(|| format!("truncation at E = {e}")),
                    },
                };
                match eval_sums(&p, e, n, cfg.tol) {
                    Ok(s) => Ok(Some(vec![
                        ("q", q_label(q).into()),
                        ("E", e.into()),
                        ("G_plus", s.g(Parity::Even).into()),
                        ("G_minus", s.g(Parity::Odd).into()),
                        ("pole_distance", s.pole_distance.into()),
                        ("terms", s.terms.into()),
                        ("converged", s.converged.into()),
                    ])),
                    Err(CoreError::PoleProximity { .. }) => Ok(None),
                    Err(err) => Err(err).context(|| format!("G at E = {e}")),
                }
            })
            .collect::<Result<_>>()?;
        for row in rows.into_iter().flatten() {
            t.push(row);
        }
    }
    Ok(t)
}

fn level_search(cfg: &RunConfig) -> LevelSearch {
    LevelSearch {
        e_min: cfg.e_range.lo,
        e_max: cfg.e_range.hi,
        truncation: cfg.trunc.first().copied(),
        tol: 1e-12,
        series_tol: cfg.tol,
    }
}

/// Level lines, pole lines, degenerate points and, optionally, the ED
/// overlay over `g_range`.
fn spectrum(cfg: &RunConfig) -> Result<Table> {
    let mut cols = vec!["kind", "g", "q", "parity", "E"];
    if cfg.scaled {
        cols.push("E_scaled");
    }
    cols.extend(["pole_interval", "n"]);
    let mut t = Table::new(&cols);
    let gr = cfg.g_range.expect("validated");
    let gs = gr.values();
    let search = level_search(cfg);
    let parities = cfg.parities();
    let scaled = |p: &ModelParams, e: f64| -> Result<Cell> {
        Ok(if cfg.scaled { scale_energy(e, p).context(|| "scaling".into())?.into() } else { Cell::Empty })
    };

    for q in cfg.subspaces() {
        let per_g: Vec<Vec<Vec<(&'static str, Cell)>>> = gs
            .par_iter()
            .map(|&g| {
                let p = params(cfg, g, q)?;
                let mut rows = Vec::new();
                let set = find_levels(&p, &search).context(|| format!("levels at g = {g}"))?;
                for l in set.levels.iter().filter(|l| parities.contains(&l.parity)) {
                    rows.push(vec![
                        ("kind", "level".into()),
                        ("g", g.into()),
                        ("q", q_label(q).into()),
                        ("parity", parity_label(l.parity).into()),
                        ("E", l.energy.into()),
                        ("E_scaled", scaled(&p, l.energy)?),
                        ("pole_interval", l.pole_interval.into()),
                    ]);
                }
                let frame = p.frame().context(|| format!("frame at g = {g}"))?;
                for n in 0.. {
                    let e = frame.pole_energy(n, q);
                    if e > cfg.e_range.hi {
                        break;
                    }
                    if e >= cfg.e_range.lo {
                        rows.push(vec![
                            ("kind", "pole".into()),
                            ("g", g.into()),
                            ("q", q_label(q).into()),
                            ("E", e.into()),
                            ("E_scaled", scaled(&p, e)?),
                            ("n", n.into()),
                        ]);
                    }
                }
                if cfg.ed {
                    let k = set.levels.len().max(cfg.states) + 4;
                    let res = diagonalize_converged(&p, cfg.dim, k, 1e-8, 16 * cfg.dim)
                        .context(|| format!("ED at g = {g}"))?;
                    for (e, par) in res.eigenvalues.iter().zip(&res.parities) {
                        if *e > cfg.e_range.hi || par.is_some_and(|x| !parities.contains(&x)) {
                            continue;
                        }
                        rows.push(vec![
                            ("kind", "ed".into()),
                            ("g", g.into()),
                            ("q", q_label(q).into()),
                            ("parity", par.map_or("?", parity_label).into()),
                            ("E", (*e).into()),
                            ("E_scaled", scaled(&p, *e)?),
                        ]);
                    }
                }
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        for row in per_g.into_iter().flatten() {
            t.push(row);
        }

        if gs.len() > 1 {
            // pole lines descend with g, so the top of the range bounds n
            let top = params(cfg, gr.hi, q)?.frame().context(|| "frame".into())?;
            let n_max = (0..).take_while(|&n| top.pole_energy(n, q) <= cfg.e_range.hi).count();
            let per_n: Vec<Vec<_>> = (0..n_max)
                .into_par_iter()
                .map(|n| {
                    find_degenerate_points(cfg.delta, cfg.r, q, n, (gr.lo, gr.hi), 1e-13)
                        .context(|| format!("degenerate points on pole line {n}"))
                })
                .collect::<Result<_>>()?;
            for dp in per_n.into_iter().flatten().filter(|d| d.energy >= cfg.e_range.lo) {
                let p = params(cfg, dp.g_value, q)?;
                t.push(vec![
                    ("kind", "degenerate".into()),
                    ("g", dp.g_value.into()),
                    ("q", q_label(q).into()),
                    ("parity", "both".into()),
                    ("E", dp.energy.into()),
                    ("E_scaled", scaled(&p, dp.energy)?),
                    ("n", dp.n.into()),
                ]);
            }
        }
    }
    Ok(t)
}

/// Roots of `F_n(g)` per splitting, up to the collapse point unless
/// `g_range` is given.
fn degenerate(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["delta", "q", "n", "index", "g", "E", "last", "delta_c", "status"]);
    let g_c = collapse_coupling(cfg.r);
    let range = cfg.g_range.map_or((0.0, g_c * (1.0 - 1e-12)), |r| (r.lo, r.hi));
    let mut jobs = Vec::new();
    for d in cfg.deltas() {
        for q in cfg.subspaces() {
            for &n in &cfg.n {
                jobs.push((d, q, n));
            }
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(d, q, n)| {
            find_degenerate_points(d, cfg.r, q, n, range, 1e-13)
                .context(|| format!("degenerate points at delta = {d}, n = {n}"))
        })
        .collect::<Result<_>>()?;
    for (&(d, q, n), pts) in jobs.iter().zip(results) {
        let dc = critical_splitting(q, cfg.r);
        if pts.is_empty() {
            t.push(vec![
                ("delta", d.into()),
                ("q", q_label(q).into()),
                ("n", n.into()),
                ("delta_c", dc.into()),
                ("status", "none".into()),
            ]);
        }
        let k = pts.len();
        for (i, dp) in pts.into_iter().enumerate() {
            t.push(vec![
                ("delta", d.into()),
                ("q", q_label(q).into()),
                ("n", n.into()),
                ("index", i.into()),
                ("g", dp.g_value.into()),
                ("E", dp.energy.into()),
                ("last", (i + 1 == k).into()),
                ("delta_c", dc.into()),
                ("status", "ok".into()),
            ]);
        }
    }
    Ok(t)
}

/// Exceptional G on pole line `m` along `x = -log10(1 - g/g_c)`, its zeros
/// per truncation, and an exponential fit of the resolved zeros at the
/// largest truncation.
fn exceptional(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&[
        "kind", "q", "N", "index", "x", "g", "G", "resolved", "precision_floor", "mu", "mu0", "max_residual",
    ]);
    let xs = cfg.x_range.values();
    for q in cfg.subspaces() {
        let p = params(cfg, 0.0, q)?;
        let curves: Vec<Vec<f64>> = cfg
            .trunc
            .iter()
            .map(|&n| {
                xs.par_iter()
                    .map(|&x| {
                        exceptional_at(&p, cfg.m, x, n, 0.0)
                            .context(|| format!("exceptional G at x = {x}"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (&n, vals) in cfg.trunc.iter().zip(&curves) {
            for (&x, &v) in xs.iter().zip(vals) {
                t.push(vec![("kind", "curve".into()), ("q", q_label(q).into()), ("N", n.into()), ("x", x.into()), ("G", v.into())]);
            }
        }
        let zeros: Vec<ExceptionalZeros> = cfg
            .trunc
            .iter()
            .zip(&curves)
            .map(|(&n, vals)| {
                refine_exceptional_zeros(&p, cfg.m, &xs, vals, n, 1e-10).context(|| format!("zeros at N = {n}"))
            })
            .collect::<Result<_>>()?;
        for z in &zeros {
            for i in 0..z.count() {
                t.push(vec![
                    ("kind", "zero".into()),
                    ("q", q_label(q).into()),
                    ("N", z.truncation.into()),
                    ("index", i.into()),
                    ("x", z.x[i].into()),
                    ("g", z.g[i].into()),
                    ("resolved", z.resolved[i].into()),
                    ("precision_floor", (z.x[i] > 15.0).into()),
                ]);
            }
        }
        if let Some(last) = zeros.last() {
            let offsets: Vec<f64> = last.resolved_x().iter().map(|x| 10f64.powf(-x)).collect();
            if offsets.len() >= 3 {
                let fit = fit_exponential_offsets(&offsets, 0).context(|| "exponential fit".into())?;
                t.push(vec![
                    ("kind", "fit".into()),
                    ("q", q_label(q).into()),
                    ("N", last.truncation.into()),
                    ("mu", fit.mu.into()),
                    ("mu0", fit.mu0.into()),
                    ("max_residual", fit.max_residual.into()),
                ]);
            }
        }
    }
    Ok(t)
}

fn region_label(r: Region) -> &'static str {
    match r {
        Region::A => "A",
        Region::CriticalLower => "critical_lower",
        Region::B => "B",
        Region::CriticalUpper => "critical_upper",
        Region::C => "C",
    }
}

fn count_label(c: CountClass) -> &'static str {
    match c {
        CountClass::None => "none",
        CountClass::Finite => "finite",
        CountClass::Infinite => "infinite",
    }
}

fn i1_label(i: &FaddeevI1) -> &'static str {
    match i {
        FaddeevI1::Finite { .. } => "finite",
        FaddeevI1::Divergent { .. } => "divergent",
        FaddeevI1::Undetermined { .. } => "undetermined",
    }
}

/// Bound states of the collapse-point problem per splitting, with the
/// integral criteria at `κ = 0`.
fn collapse(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&[
        "kind", "delta", "region", "count_class", "state", "kappa4", "E", "parity", "boundary_mass", "I2", "I2_sign",
        "I1", "unresolved", "half_width", "x", "psi",
    ]);
    let grid = CollapseGrid { half_width: cfg.half_width, h: cfg.h, ..CollapseGrid::default() };
    let per_delta: Vec<_> = cfg
        .deltas()
        .par_iter()
        .map(|&d| {
            let ctx = || format!("collapse problem at delta = {d}");
            let set = solve_bound_states(d, cfg.r, &grid, cfg.states).context(ctx)?;
            let (i2, i2_err) = brownstein_i2_with_error(d, cfg.r, 0.0).context(ctx)?;
            let i1 = faddeev_i1(d, cfg.r, 0.0, cfg.y_max).context(ctx)?;
            Ok((d, set, i2, i2_err, i1))
        })
        .collect::<Result<_>>()?;
    for (d, set, i2, i2_err, i1) in per_delta {
        let region = Region::classify(d, cfg.r);
        let sign = if i2.abs() <= i2_err { "0" } else if i2 > 0.0 { "+" } else { "-" };
        let common = |kind: &'static str| -> Vec<(&'static str, Cell)> {
            vec![
                ("kind", kind.into()),
                ("delta", d.into()),
                ("region", region_label(region).into()),
                ("count_class", count_label(set.count_class).into()),
                ("I2", i2.into()),
                ("I2_sign", sign.into()),
                ("I1", i1_label(&i1).into()),
                ("unresolved", set.unresolved.len().into()),
                ("half_width", set.half_width.into()),
            ]
        };
        if set.states.is_empty() {
            t.push(common("none"));
        }
        for (i, s) in set.states.iter().enumerate() {
            let mut row = common("state");
            row.extend([
                ("state", i.into()),
                ("kappa4", s.kappa4.into()),
                ("E", s.energy.into()),
                ("parity", parity_label(s.parity).into()),
                ("boundary_mass", s.boundary_mass.into()),
            ]);
            t.push(row);
        }
        if cfg.wavefunction {
            for (i, s) in set.states.iter().enumerate() {
                // grid normalization Σψ² = 1 turned into ∫ψ² dx = 1
                let scale = set.h.sqrt().recip();
                for (x, v) in set.x.iter().zip(&s.psi) {
                    t.push(vec![
                        ("kind", "psi".into()),
                        ("delta", d.into()),
                        ("state", i.into()),
                        ("x", (*x).into()),
                        ("psi", (v * scale).into()),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// Lowest `states` eigenvalues by Fock-space diagonalization, doubling the
/// dimension until they move by less than `1e-8`.
fn ed(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["q", "index", "E", "parity", "parity_expectation", "residual", "dim", "truncation_shift", "near_collapse"]);
    for q in cfg.subspaces() {
        let p = params(cfg, cfg.g, q)?;
        let res = diagonalize_converged(&p, cfg.dim, cfg.states, 1e-8, 16 * cfg.dim).context(|| "ED".into())?;
        for i in 0..res.eigenvalues.len() {
            t.push(vec![
                ("q", q_label(q).into()),
                ("index", i.into()),
                ("E", res.eigenvalues[i].into()),
                ("parity", res.parities[i].map_or("?", parity_label).into()),
                ("parity_expectation", res.parity_expectations[i].into()),
                ("residual", res.residuals[i].into()),
                ("dim", res.dimension.into()),
                ("truncation_shift", res.truncation_shift.into()),
                ("near_collapse", res.near_collapse.into()),
            ]);
        }
    }
    Ok(t)
}

/// Rescaled coefficients at `energy` up to `trunc[0]`.
fn coeffs(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["q", "n", "Lambda", "xi", "log10_abs_Lambda", "log10_abs_xi"]);
    let e = cfg.energy.expect("validated");
    let n_max = cfg.trunc.first().copied().unwrap_or(200);
    for q in cfg.subspaces() {
        let p = params(cfg, cfg.g, q)?;
        let s = run_rescaled(&p, e, n_max).context(|| format!("coefficients at E = {e}"))?;
        for (n, (l, x)) in s.values.iter().enumerate() {
            t.push(vec![
                ("q", q_label(q).into()),
                ("n", n.into()),
                ("Lambda", (*l).into()),
                ("xi", (*x).into()),
                ("log10_abs_Lambda", l.abs().log10().into()),
                ("log10_abs_xi", x.abs().log10().into()),
            ]);
        }
    }
    Ok(t)
}
