mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sarg04_core::detection::{info_ab, DeviceParams, OpticalSetup};
use sarg04_core::pns::{eve_info, maximize_eve, ConstraintSystem, EveOptions, ForwardModel, PnsStrategy};
use sarg04_core::qmath::binary_entropy;
use sarg04_core::sweep::{approx_point, check_monotone, limiting_distance, optimize_point, rate_at, sweep, PracticalOptions, SweepRecord};
use sarg04_core::Execution;

fn setup(distance: f64, visibility: f64, mu: f64) -> OpticalSetup {
    OpticalSetup::new(DeviceParams::default(), distance, visibility, mu).unwrap()
}

fn sequential() -> PracticalOptions {
    PracticalOptions {
        execution: Execution::Sequential,
        ..PracticalOptions::default()
    }
}

/// Checks a feasible record against a direct evaluation of both informations
/// and against the forwarding conditions.
fn assert_record_consistent(r: &SweepRecord, visibility: f64) {
    let s = setup(r.distance_km, visibility, r.mu_opt);
    let strategy = r.eve_strategy.as_ref().unwrap();
    let direct = info_ab(&s, r.q_opt).unwrap() - eve_info(&s, strategy, r.q_opt).unwrap().i_total;
    assert!((direct - r.r_sk).abs() < 1e-10, "{} km: {direct} vs {}", r.distance_km, r.r_sk);
    let system = ConstraintSystem::new(&s, strategy.n_max, ForwardModel::LeadingOrder).unwrap();
    for x in system.residuals(strategy) {
        assert!(x.abs() < 1e-10, "{} km residual {x:e}", r.distance_km);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strategy_invariants(
        p_u1 in 0.0f64..=1.0,
        p_s in prop::collection::vec(0.0f64..=1.0, 6),
        share in 0.0f64..=1.0,
        d_tilde in 0.0f64..=0.5,
        q in 0.0f64..=0.5,
    ) {
        let p_i32 = share * (1.0 - p_s[1]);
        let st = PnsStrategy::new(p_u1, p_s, p_i32, d_tilde).unwrap();
        for n in 3..=7 {
            prop_assert!((st.p_i(n) + st.p_s(n) - 1.0).abs() < 1e-15);
        }
        prop_assert_eq!(PnsStrategy::from_lp_vector(&st.to_lp_vector(), d_tilde), st.clone());
        let b = eve_info(&setup(50.0, 0.97, 0.5), &st, q).unwrap();
        let channels = b.unitary + b.storage.iter().map(|c| c.1).sum::<f64>() + b.usd.iter().map(|c| c.1).sum::<f64>();
        prop_assert!((b.i_total - channels).abs() < 1e-12);
        prop_assert!(b.i_total >= 0.0);
    }

    #[test]
    fn invalid_strategies_are_rejected(excess in 1e-6f64..0.5, p_s3 in 0.0f64..=1.0) {
        let mut p_s = vec![0.5; 6];
        p_s[1] = p_s3;
        prop_assert!(PnsStrategy::new(0.0, p_s.clone(), 1.0 - p_s3 + excess, 0.1).is_err());
        prop_assert!(PnsStrategy::new(1.0 + excess, p_s.clone(), 0.0, 0.1).is_err());
        prop_assert!(PnsStrategy::new(0.0, p_s, 0.0, 0.5 + excess).is_err());
    }

    #[test]
    fn optimum_meets_forwarding_targets(distance in 30.0f64..90.0, mu in 0.05f64..1.2, q in 0.0f64..0.45) {
        let s = setup(distance, 1.0, mu);
        let system = ConstraintSystem::new(&s, 7, ForwardModel::LeadingOrder).unwrap();
        let Ok(best) = maximize_eve(&system, q, &EveOptions::default()) else { return Ok(()) };
        let mt = s.mean_received();
        let f = system.forward_distribution(&best.strategy).p_fwd;
        prop_assert!((f[1] - (mt - mt * mt)).abs() < 1e-10);
        prop_assert!((f[2] - 0.5 * mt * mt).abs() < 1e-10);
        prop_assert_eq!(best.strategy.d_tilde, 0.0);
        let direct = eve_info(&s, &best.strategy, q).unwrap().i_total;
        prop_assert!((direct - best.info).abs() <= 1e-10 * best.info.abs().max(1e-12));
    }
}

#[test]
fn optimizer_dominates_random_feasible_strategies() {
    let cases = [(30.0, 1.0, 1.0), (50.0, 1.0, 0.5), (70.0, 1.0, 0.3), (40.0, 0.95, 0.5), (60.0, 0.95, 0.3)];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut violations = 0;
    for (d, v, mu) in cases {
        let s = setup(d, v, mu);
        let system = ConstraintSystem::new(&s, 7, ForwardModel::LeadingOrder).unwrap();
        for q in [0.0, 0.1] {
            let best = maximize_eve(&system, q, &EveOptions::default()).unwrap();
            let mut sampled = 0;
            let mut draws = 0;
            while sampled < 10_000 {
                draws += 1;
                assert!(draws < 5_000_000, "rejection sampler stalled at {d} km");
                let Some(st) = common::random_feasible_strategy(&system, &mut rng) else { continue };
                let info = eve_info(&s, &st, q).unwrap().i_total;
                if info > best.info * (1.0 + 1e-9) {
                    violations += 1;
                }
                sampled += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn sweep_records_are_consistent_and_monotone() {
    let dev = DeviceParams::default();
    let records = sweep(30.0, 90.0, 10.0, 1.0, &dev, &sequential()).unwrap();
    assert!(records.iter().all(|r| r.has_key()));
    for r in &records {
        assert_record_consistent(r, 1.0);
        assert!(r.mu_opt >= 0.1);
    }
    assert!(check_monotone(&records, 0.02).is_empty());
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let dev = DeviceParams::default();
    let a = sweep(40.0, 80.0, 20.0, 1.0, &dev, &sequential()).unwrap();
    let b = sweep(40.0, 80.0, 20.0, 1.0, &dev, &PracticalOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn optimizer_beats_closed_form_operating_point() {
    let dev = DeviceParams::default();
    let opts = sequential();
    for d in [30.0, 45.0, 60.0, 75.0] {
        let r = optimize_point(d, 1.0, &dev, &opts).unwrap();
        let heuristic = approx_point(d, &dev, 7).unwrap().mu_approx;
        if let Ok(p) = rate_at(&setup(d, 1.0, heuristic), 0.0, &opts) {
            assert!(r.r_sk >= p.r_sk, "{d} km: {} < {}", r.r_sk, p.r_sk);
        }
    }
}

#[test]
fn preprocessing_is_negligible_in_the_working_regime() {
    let dev = DeviceParams::default();
    let with = sequential();
    let without = PracticalOptions { preprocessing: false, ..sequential() };
    for d in [40.0, 50.0, 60.0, 70.0] {
        let a = optimize_point(d, 1.0, &dev, &with).unwrap();
        let b = optimize_point(d, 1.0, &dev, &without).unwrap();
        assert!(a.r_sk >= b.r_sk);
        assert!((a.r_sk - b.r_sk) / b.r_sk < 0.01, "{d} km");
        assert!(a.q_opt < 1e-3, "{d} km: q_opt = {}", a.q_opt);
    }
}

#[test]
fn reduced_visibility_record_is_consistent() {
    let dev = DeviceParams::default();
    let r = optimize_point(50.0, 0.95, &dev, &sequential()).unwrap();
    assert!(r.has_key());
    assert_record_consistent(&r, 0.95);
    let st = r.eve_strategy.unwrap();
    assert!(st.p_u1 > 0.0 && st.p_u1 <= 1.0);
}

/// BB84 with every multi-photon pulse stored and forwarded losslessly:
/// `(mu t eta / 2 + p_d)(1 - h(Q)) - (eta / 2) mu^2 / 2`, maximized over `mu`.
fn bb84_like_rate(distance: f64, dev: &DeviceParams) -> f64 {
    let t = dev.transmission(distance);
    (1..=3000)
        .map(|i| {
            let mu = 1e-3 * i as f64;
            let sifted = 0.5 * mu * t * dev.eta + dev.p_dark;
            let qber = 0.5 * dev.p_dark / sifted;
            sifted * (1.0 - binary_entropy(qber).unwrap()) - 0.25 * dev.eta * mu * mu
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn limiting_distance_exceeds_bb84_like_model() {
    let dev = DeviceParams::default();
    let bb84_limit = (1..=200).map(f64::from).take_while(|&d| bb84_like_rate(d, &dev) > 0.0).last().unwrap();
    let opts = sequential();
    let sarg_at = optimize_point(bb84_limit + 5.0, 1.0, &dev, &opts).unwrap();
    assert!(sarg_at.has_key(), "no key at {} km", bb84_limit + 5.0);
}

#[test]
fn reduced_visibility_shortens_the_range() {
    let dev = DeviceParams::default();
    let opts = sequential();
    let ideal = sweep(60.0, 90.0, 5.0, 1.0, &dev, &opts).unwrap();
    let noisy = sweep(60.0, 90.0, 5.0, 0.95, &dev, &opts).unwrap();
    let ideal_limit = limiting_distance(&ideal).unwrap();
    let noisy_limit = limiting_distance(&noisy).unwrap_or(0.0);
    assert!(noisy_limit < ideal_limit, "{noisy_limit} vs {ideal_limit}");
    for (a, b) in ideal.iter().zip(&noisy).filter(|(_, b)| b.has_key()) {
        assert!(b.r_sk < a.r_sk, "{} km", a.distance_km);
    }
}

#[test]
fn storage_only_model_tracks_the_optimizer() {
    let dev = DeviceParams::default();
    let d = 55.0;
    let numeric = optimize_point(d, 1.0, &dev, &sequential()).unwrap();
    let approx = approx_point(d, &dev, 7).unwrap();
    let semi = approx.semi_analytic;
    assert!((semi.mu_opt - numeric.mu_opt).abs() / numeric.mu_opt < 0.03, "{} vs {}", semi.mu_opt, numeric.mu_opt);
    assert!(semi.mu_opt > approx.mu_approx && numeric.mu_opt > approx.mu_approx);
    // Eve's extra options can only lower the rate
    assert!(numeric.r_sk <= semi.r_sk * (1.0 + 1e-9));
}
