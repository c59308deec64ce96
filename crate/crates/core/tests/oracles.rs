mod common;

use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarg04_core::detection::{p_acc_z, p_double_z, rates, DeviceParams, OpticalSetup};
use sarg04_core::incoherent::{build_attack, helstrom_eigenvalues_closed_form, helstrom_info, Target};
use sarg04_core::lower_bound::rate;
use sarg04_core::lp::{LinearProgram, Row};
use sarg04_core::pns::{maximize_eve, ConstraintSystem, EveOptions, ForwardModel};
use sarg04_core::qmath::{poisson, sift_map, sift_map_closed_form, BellDiagonal, PhotonDistribution, SiftProtocol};

use common::*;

fn setup(distance: f64, visibility: f64, mu: f64) -> OpticalSetup {
    OpticalSetup::new(DeviceParams::default(), distance, visibility, mu).unwrap()
}

/// Distance at which the default fibre has transmission `t`.
fn distance_for(t: f64) -> f64 {
    -10.0 * t.log10() / DeviceParams::default().alpha
}

#[test]
fn four_set_sifting_matches_closed_form_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let rho = random_density_matrix(&mut rng);
        let brute = sift_map(&rho, SiftProtocol::FourSet).unwrap().weights();
        let closed = sift_map_closed_form(&rho, SiftProtocol::FourSet).unwrap().weights();
        for k in 0..4 {
            assert_abs_diff_eq!(brute[k], closed[k], epsilon = 1e-10);
        }
        assert_abs_diff_eq!(brute[3] + 3.0 * brute[2], 2.0 * brute[1], epsilon = 1e-10);
        assert!(brute[3] >= brute[2] - 1e-10);
    }
}

#[test]
fn two_set_sifting_matches_closed_form_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let rho = random_density_matrix(&mut rng);
        let brute = sift_map(&rho, SiftProtocol::TwoSet).unwrap().weights();
        let closed = sift_map_closed_form(&rho, SiftProtocol::TwoSet).unwrap().weights();
        for k in 0..4 {
            assert_abs_diff_eq!(brute[k], closed[k], epsilon = 1e-10);
        }
        assert!(brute[3] >= 0.5 * brute[1] - 1e-10);
        assert!(brute[3] <= 2.0 * brute[1] + 1e-10);
    }
}

#[test]
fn rate_matches_explicit_purification() {
    let reference = BellDiagonal::new([0.82, 0.08, 0.03, 0.07]).unwrap();
    for q in [0.0, 0.1, 0.25, 0.4] {
        assert_abs_diff_eq!(rate(&reference, q).unwrap(), purification_rate(&reference, q), epsilon = 1e-10);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let w: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
        let state = BellDiagonal::from_unnormalized(w).unwrap();
        let q = rng.gen_range(0.0..0.5);
        assert_abs_diff_eq!(rate(&state, q).unwrap(), purification_rate(&state, q), epsilon = 1e-10);
    }
}

#[test]
fn rate_reference_values() {
    let perfect = BellDiagonal::new([1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_abs_diff_eq!(rate(&perfect, 0.0).unwrap(), 1.0, epsilon = 1e-12);
    let mixed = BellDiagonal::new([0.25; 4]).unwrap();
    assert_abs_diff_eq!(rate(&mixed, 0.0).unwrap(), -1.0, epsilon = 1e-12);
}

#[test]
fn poisson_series_reproduces_rate_bundle() {
    let d = distance_for(0.25);
    for v in [1.0, 0.95, 0.7] {
        let s = setup(d, v, 1.5);
        assert_abs_diff_eq!(s.transmission(), 0.25, epsilon = 1e-12);
        let closed = rates(&s);
        let brute = series_rate_bundle(&s);
        assert_abs_diff_eq!(closed.c0, brute.c0, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.c_acc_x, brute.c_acc_x, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.c_acc_z, brute.c_acc_z, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.c_acc, brute.c_acc, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.c2_x, brute.c2_x, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.c2_z, brute.c2_z, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.qber, brute.qber, epsilon = 1e-10);
    }
}

#[test]
fn click_probabilities_match_photon_routing() {
    for v in [1.0, 0.9, 0.3] {
        for (eta, pd) in [(0.1, 1e-5), (0.6, 0.02)] {
            let s = OpticalSetup::new(DeviceParams { alpha: 0.25, eta, p_dark: pd }, 30.0, v, 0.5).unwrap();
            for n in 0..=6 {
                let (acc, double) = routed_click_probabilities(n, v, eta, pd);
                assert_abs_diff_eq!(p_acc_z(n, v, &s), acc, epsilon = 1e-12);
                assert_abs_diff_eq!(p_double_z(n, v, &s), double, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn single_photon_double_click_ignores_visibility() {
    let s = setup(40.0, 1.0, 0.5);
    let reference = p_double_z(1, 1.0, &s);
    for v in [0.0, 0.3, 0.8, 0.95] {
        assert_abs_diff_eq!(p_double_z(1, v, &s), reference, epsilon = 1e-16);
    }
}

#[test]
fn binomial_thinning_reproduces_poisson() {
    let (mu, t) = (1.3, 0.3);
    let a = PhotonDistribution::poissonian(mu, 80).unwrap();
    let b = a.thinned(t).unwrap();
    for n in 0..=10 {
        let brute: f64 = (n..=80)
            .map(|m| {
                let binom: f64 = (0..n).map(|k| (m - k) as f64 / (k + 1) as f64).product();
                poisson(m, mu) * binom * t.powi(n as i32) * (1.0 - t).powi((m - n) as i32)
            })
            .sum();
        assert_abs_diff_eq!(b.probability(n), poisson(n, mu * t), epsilon = 1e-14);
        assert_abs_diff_eq!(brute, poisson(n, mu * t), epsilon = 1e-14);
    }
}

#[test]
fn helstrom_spectrum_and_rewritten_information() {
    for k in 1..=49 {
        let d = k as f64 / 100.0;
        let attack = build_attack(d).unwrap();
        let closed = helstrom_eigenvalues_closed_form(d);
        let h = helstrom_info(&attack, Target::Alice, 0.0).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(h.eigenvalues[i], closed[i], epsilon = 1e-9);
        }
        assert_abs_diff_eq!(h.outcome_probs[1], h.outcome_probs[2], epsilon = 1e-12);
        for q in [0.0, 0.1, 0.3, 0.45] {
            let hq = helstrom_info(&attack, Target::Alice, q).unwrap();
            assert_abs_diff_eq!(hq.info_rewritten(), hq.info, epsilon = 1e-10);
        }
    }
}

#[test]
fn reduced_constraints_imply_full_statistics_at_unit_visibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (d, mu) in [(30.0, 1.0), (50.0, 0.5), (70.0, 0.3)] {
        let system = ConstraintSystem::new(&setup(d, 1.0, mu), 7, ForwardModel::Exact).unwrap();
        let mut checked = 0;
        while checked < 50 {
            let Some(st) = random_feasible_strategy(&system, &mut rng) else { continue };
            for r in full_constraint_residuals(&system, &st) {
                assert!(r.abs() < 1e-10, "{r:e} at {d} km");
            }
            checked += 1;
        }
        let best = maximize_eve(&system, 0.0, &EveOptions { forward_model: ForwardModel::Exact, ..EveOptions::default() }).unwrap();
        for r in full_constraint_residuals(&system, &best.strategy) {
            assert!(r.abs() < 1e-10, "{r:e} at the optimum, {d} km");
        }
    }
}

#[test]
fn double_click_discrepancy_below_unit_visibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, v, mu) in [(40.0, 0.95, 0.5), (60.0, 0.95, 0.3), (50.0, 0.98, 0.4)] {
        let s = setup(d, v, mu);
        let system = ConstraintSystem::new(&s, 7, ForwardModel::Exact).unwrap();
        let mut checked = 0;
        while checked < 20 {
            let Some(st) = random_feasible_strategy(&system, &mut rng) else { continue };
            let r = full_constraint_residuals(&system, &st);
            for (i, x) in r[..4].iter().enumerate() {
                assert!(x.abs() < 1e-10, "constraint {i}: {x:e}");
            }
            let estimate = system.forward_distribution(&st).p_fwd[2] * 2.0 * s.eta * s.eta * s.disturbance();
            let ratio = r[4].abs() / estimate;
            assert!((0.5..=2.0).contains(&ratio), "discrepancy {:e} vs estimate {estimate:e}", r[4]);
            checked += 1;
        }
    }
}

#[test]
fn simplex_agrees_with_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut solved = 0;
    for _ in 0..300 {
        let n = rng.gen_range(3..=6);
        let row = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let anchor: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let eq = row(&mut rng);
        let ineq = row(&mut rng);
        let dot = |a: &[f64]| a.iter().zip(&anchor).map(|(x, y)| x * y).sum::<f64>();
        let lp = LinearProgram {
            objective: row(&mut rng),
            equalities: vec![Row::new(eq.clone(), dot(&eq))],
            inequalities: vec![Row::new(ineq.clone(), dot(&ineq) + rng.gen_range(0.0..0.5))],
            upper: vec![1.0; n],
        };
        let a = lp.solve().unwrap();
        let b = lp.solve_by_vertex_enumeration().unwrap();
        assert_abs_diff_eq!(a.objective, b.objective, epsilon = 1e-9);
        assert!(lp.is_feasible(&a.x, 1e-9));
        solved += 1;
    }
    assert_eq!(solved, 300);
}
