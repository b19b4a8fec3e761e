use proptest::prelude::*;

use tprabi_core::collapse::{
    alpha, mass, nondegeneracy_check, potential, solve_bound_states, threshold_bound, x_of_y, y_of_x, CollapseGrid,
    Region,
};
use tprabi_core::fock::{build_hamiltonian, diagonalize};
use tprabi_core::gfunction::eval_sums;
use tprabi_core::linalg::SymBand;
use tprabi_core::model::{collapse_coupling, critical_splitting, crossing_point};
use tprabi_core::recurrence::{collapse_coefficients, rescale_raw, run_raw, run_rescaled};
use tprabi_core::spectrum::{find_levels, LevelSearch};
use tprabi_core::{BargmannIndex, ModelParams, Parity};

fn q_strategy() -> impl Strategy<Value = BargmannIndex> {
    prop_oneof![Just(BargmannIndex::Quarter), Just(BargmannIndex::ThreeQuarters)]
}

/// `(Δ, r, g)` with `g` a fraction of `g_c`.
fn params(max_frac: f64) -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..3.0f64, 0.0..2.5f64, 0.0..max_frac).prop_map(|(d, r, f)| (d, r, f * collapse_coupling(r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_ranges_and_inversion((d, r, g) in params(0.999), q in q_strategy()) {
        let p = ModelParams::new(d, r, g, q, Parity::Even).unwrap();
        let f = p.frame().unwrap();
        prop_assert!(f.beta_plus > 0.0 && f.beta_plus <= 1.0);
        prop_assert!(f.beta_minus > 0.0 && f.beta_minus <= 1.0);
        prop_assert!((0.0..1.0).contains(&f.tanh_theta));
        let c2 = (f.beta_plus + f.beta_minus) / (2.0 * f.beta_plus);
        prop_assert!((f.cosh2_theta - c2).abs() <= 1e-12 * c2);
        prop_assert!((f.cosh2_theta - f.sinh2_theta - 1.0).abs() <= 1e-12 * f.cosh2_theta);
    }

    #[test]
    fn pole_lines_are_equally_spaced((d, r, g) in params(0.99), q in q_strategy(), n in 0usize..500) {
        let f = ModelParams::new(d, r, g, q, Parity::Even).unwrap().frame().unwrap();
        let gap = f.pole_energy(n + 1, q) - f.pole_energy(n, q);
        let ulp = f64::EPSILON * f.pole_energy(n + 1, q).abs().max(1.0);
        prop_assert!((gap - f.pole_spacing()).abs() <= 4.0 * ulp);
    }

    #[test]
    fn crossing_at_critical_splitting(r in 0.01..0.99f64, q in q_strategy()) {
        let cp = crossing_point(q, critical_splitting::<f64>(q, r), r).unwrap();
        prop_assert!((cp.g0 - collapse_coupling(r)).abs() <= 1e-12);
        prop_assert!((cp.e0.unwrap() + 0.5).abs() <= 1e-12);
    }

    #[test]
    fn parity_components((d, r, g) in params(0.9), q in q_strategy(), e in -0.4..6.0f64) {
        let p = ModelParams::new(d, r, g, q, Parity::Even).unwrap();
        if let Ok(s) = eval_sums(&p, e, 20_000, 1e-12) {
            let (gp, gm) = (s.g(Parity::Even), s.g(Parity::Odd));
            let scale = s.lambda.abs().max(s.xi.abs());
            prop_assert!((gp + gm - 2.0 * s.lambda).abs() <= 4.0 * f64::EPSILON * scale);
            prop_assert!((gp - gm - 2.0 * s.xi).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn raw_and_rescaled_agree(
        d in 0.0..3.0f64, r in 0.05..2.0f64, frac in 0.02..0.9f64, q in q_strategy(), e in -1.0..8.0f64,
    ) {
        let p = ModelParams::new(d, r, frac * collapse_coupling(r), q, Parity::Even).unwrap();
        if let Ok(raw) = run_raw(&p, e, 40) {
            let mapped: Vec<(f64, f64)> = rescale_raw(&raw, &p.frame().unwrap(), q);
            let resc = run_rescaled::<f64>(&p, e, 40).unwrap();
            // compare against the running magnitude, single terms can cancel
            let mut scale = 0.0f64;
            for (a, b) in mapped.iter().zip(&resc.values) {
                scale = scale.max(b.0.abs()).max(b.1.abs());
                prop_assert!((a.0 - b.0).abs() <= 1e-10 * scale);
                prop_assert!((a.1 - b.1).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn collapse_coefficients_do_not_depend_on_q(n in 0usize..80) {
        let a = collapse_coefficients::<f64>(n, BargmannIndex::Quarter);
        let b = collapse_coefficients::<f64>(n, BargmannIndex::ThreeQuarters);
        for (x, y) in a.second().zip(b.second()) {
            prop_assert!((x - y).abs() <= 1e-15 * y);
        }
    }

    #[test]
    fn mass_and_potential(x in -1e4..1e4f64, r in 0.01..4.0f64, d in 0.0..4.0f64) {
        let m = mass(x, r);
        prop_assert!(m > 0.0);
        let a = alpha(r);
        // m lies between 1 and 1/α
        prop_assert!(m >= 1.0f64.min(1.0 / a) * (1.0 - 1e-15) && m <= 1.0f64.max(1.0 / a) * (1.0 + 1e-15));
        let dc = critical_splitting::<f64>(BargmannIndex::Quarter, r);
        if (d - dc).abs() > 1e-6 && x.abs() > 1e-3 {
            prop_assert!(potential(x, d, r) != 0.0 || potential(0.0, d, r) != 0.0);
        }
        prop_assert_eq!(potential(x, dc, r), 0.0);
    }

    #[test]
    fn y_map_is_odd_increasing_and_invertible(x in 0.0..1e5f64, dx in 1e-6..10.0f64, r in 0.01..4.0f64) {
        let a = alpha(r);
        prop_assert_eq!(y_of_x(-x, a), -y_of_x(x, a));
        prop_assert!(y_of_x(x + dx, a) > y_of_x(x, a));
        let y = y_of_x(x, a);
        prop_assert!((x_of_y(y, a) - x).abs() <= 1e-10 * x.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hamiltonian_commutes_with_parity((d, r, g) in params(0.95), q in q_strategy(), seed in any::<u64>()) {
        let p = ModelParams::new(d, r, g, q, Parity::Even).unwrap();
        let h = build_hamiltonian(&p, 200).unwrap();
        let n = h.dimension;
        // vectors supported on the interior 80%, away from the truncation edge
        let mut state = seed | 1;
        let v: Vec<f64> = (0..n)
            .map(|i| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                if i >= n / 10 && i < n - n / 10 { (state % 2001) as f64 / 1000.0 - 1.0 } else { 0.0 }
            })
            .collect();
        let a = h.apply(&h.apply_parity(&v));
        let b = h.apply_parity(&h.apply(&v));
        let err = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-8);
        for i in 0..n {
            for j in i.saturating_sub(3)..(i + 4).min(n) {
                prop_assert_eq!(h.matrix.get(i, j), h.matrix.get(j, i));
            }
        }
    }

    #[test]
    fn ed_levels_decrease_with_dimension((d, r, g) in params(0.8), q in q_strategy()) {
        let p = ModelParams::new(d, r, g, q, Parity::Even).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for dim in [40usize, 80, 160] {
            let ed = diagonalize(&build_hamiltonian(&p, dim).unwrap(), 10).unwrap();
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&ed.eigenvalues) {
                    prop_assert!(*b <= a + 1e-9 * a.abs().max(1.0));
                }
            }
            prev = Some(ed.eigenvalues);
        }
    }

    #[test]
    fn band_reduction_preserves_spectrum(n in 4usize..40, bw in 1usize..4, seed in any::<u64>()) {
        let mut a = SymBand::zeros(n, bw);
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as f64 / 1000.0 - 1.0
        };
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                a.set(i, j, next());
            }
        }
        let t = a.to_tridiagonal();
        // trace and Frobenius norm are orthogonal invariants
        let trace_a: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let trace_t: f64 = t.diag.iter().sum();
        prop_assert!((trace_a - trace_t).abs() <= 1e-12 * n as f64);
        let fro_a: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i.abs_diff(*j) <= bw)
            .map(|(i, j)| a.get(i, j).powi(2)).sum();
        let fro_t: f64 = t.diag.iter().map(|x| x * x).sum::<f64>() + 2.0 * t.off.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((fro_a - fro_t).abs() <= 1e-12 * fro_a.max(1.0));
        let mut evs: Vec<f64> = (0..n).map(|k| t.eigenvalue(k)).collect();
        let sum: f64 = evs.iter().sum();
        prop_assert!((sum - trace_a).abs() <= 1e-10 * n as f64);
        evs.dedup();
        prop_assert!(evs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn levels_are_pinched_between_poles(d in 0.1..2.0f64, r in 0.1..0.9f64, frac in 0.1..0.7f64, q in q_strategy()) {
        let p = ModelParams::new(d, r, frac * collapse_coupling(r), q, Parity::Even).unwrap();
        let f = p.frame().unwrap();
        let set = find_levels(&p, &LevelSearch::new(4.0)).unwrap();
        for l in &set.levels {
            prop_assert!(l.energy < f.pole_energy(l.pole_interval, q));
            if l.pole_interval > 0 {
                prop_assert!(l.energy > f.pole_energy(l.pole_interval - 1, q));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Bound states at the collapse point are simple and are not annihilated
    /// by the first-order operator a degenerate partner would need.
    #[test]
    fn collapse_states_are_nondegenerate(d in prop_oneof![1.0..1.7f64, 2.0..4.0f64]) {
        let grid = CollapseGrid { half_width: 200.0, ..Default::default() };
        let set = solve_bound_states(d, 0.25, &grid, 2).unwrap();
        prop_assert!(!set.states.is_empty());
        for i in 0..set.states.len() {
            let rep = nondegeneracy_check(&set, i).unwrap();
            prop_assert!(rep.simple && !rep.annihilated);
        }
        let region = Region::classify(d, 0.25);
        for s in &set.states {
            prop_assert!(s.kappa4 > 0.0 && s.energy < -0.5);
            if region == Region::C {
                prop_assert!(s.kappa4 * (1.0 - alpha(0.25)) < threshold_bound(d, 0.25));
            }
        }
    }
}
