//! Brute-force reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use sarg04_core::detection::{p_acc_x, p_acc_z, p_double_x, p_double_z, p_zero_click, OpticalSetup, RateBundle};
use sarg04_core::pns::{usd_success, ConstraintSystem, PnsStrategy};
use sarg04_core::qmath::{binary_entropy, poisson, von_neumann_entropy, BellDiagonal, DensityMatrix4, SymmetricMatrix};

pub const SERIES_CUTOFF: usize = 60;

/// Random full-rank two-qubit state `G G^dag / tr` from a complex Gaussian-like matrix.
pub fn random_density_matrix<R: Rng>(rng: &mut R) -> DensityMatrix4 {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for row in g.iter_mut() {
        for z in row.iter_mut() {
            *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                rho[i][j] += g[i][k] * g[j][k].conj();
            }
        }
    }
    let tr: f64 = (0..4).map(|i| rho[i][i].re).sum();
    for row in rho.iter_mut() {
        for z in row.iter_mut() {
            *z /= tr;
        }
    }
    rho
}

/// Bell vectors `Phi+, Phi-, Psi+, Psi-` in the basis `|00>, |01>, |10>, |11>`.
fn bell_vectors() -> [[f64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]]
}

/// Key rate from the explicit purification `sum_i sqrt(l_i) |Bell_i>_AB |i>_E`:
/// Alice measures `z`, flips with probability `q`, and the Holevo quantity
/// of Eve's conditional states is subtracted from `1 - h(Q')`.
pub fn purification_rate(state: &BellDiagonal, q: f64) -> f64 {
    let l = state.weights();
    let bell = bell_vectors();
    // conditional Eve states rho_E|a for Alice's raw bit a
    let conditional = |a: usize| -> SymmetricMatrix {
        let v: Vec<Vec<f64>> = (0..2)
            .map(|b| (0..4).map(|i| (2.0 * l[i]).sqrt() * bell[i][2 * a + b]).collect())
            .collect();
        SymmetricMatrix::from_outer_products(&[&v[0], &v[1]])
    };
    let (e0, e1) = (conditional(0), conditional(1));
    let mix = |w: f64| e0.scaled(w).sub(&e1.scaled(w - 1.0));
    let s_e = von_neumann_entropy(&SymmetricMatrix::diagonal(&l)).unwrap();
    let s0 = von_neumann_entropy(&mix(1.0 - q)).unwrap();
    let s1 = von_neumann_entropy(&mix(q)).unwrap();
    let qber = l[2] + l[3];
    let flipped = (1.0 - q) * qber + q * (1.0 - qber);
    1.0 - binary_entropy(flipped).unwrap() - (s_e - 0.5 * (s0 + s1))
}

/// Poisson average of a per-photon quantity over `n <= SERIES_CUTOFF`.
pub fn series<F: Fn(usize) -> f64>(mean: f64, f: F) -> f64 {
    (0..=SERIES_CUTOFF).map(|n| poisson(n, mean) * f(n)).sum()
}

/// [`RateBundle`] by truncated series over the photon number at Bob.
pub fn series_rate_bundle(setup: &OpticalSetup) -> RateBundle {
    let m = setup.mean_received();
    let v = setup.visibility;
    let c_acc_x = series(m, |n| p_acc_x(n, setup));
    let c_acc_z = series(m, |n| p_acc_z(n, v, setup));
    let c_acc = 0.5 * (c_acc_x + c_acc_z);
    RateBundle {
        c0: series(m, |n| p_zero_click(n, setup)),
        c_acc_x,
        c_acc_z,
        c_acc,
        c2_x: series(m, |n| p_double_x(n, setup)),
        c2_z: series(m, |n| p_double_z(n, v, setup)),
        qber: 0.5 * c_acc_z / c_acc,
    }
}

/// `(p_acc_z, p_double_z)` for `n` photons by enumerating, for every photon,
/// which detector it reaches and whether it is detected, and both dark counts.
pub fn routed_click_probabilities(n: usize, v: f64, eta: f64, p_dark: f64) -> (f64, f64) {
    let (f, d) = (0.5 * (1.0 + v), 0.5 * (1.0 - v));
    let mut acc = 0.0;
    let mut double = 0.0;
    for pattern in 0..(1usize << (2 * n)) {
        let mut weight = 1.0;
        let (mut hit_plus, mut hit_minus) = (false, false);
        for k in 0..n {
            let to_plus = pattern >> (2 * k) & 1 == 0;
            let detected = pattern >> (2 * k + 1) & 1 == 1;
            weight *= if to_plus { f } else { d };
            weight *= if detected { eta } else { 1.0 - eta };
            if detected {
                if to_plus {
                    hit_plus = true;
                } else {
                    hit_minus = true;
                }
            }
        }
        for dark in 0..4usize {
            let dark_plus = dark & 1 == 1;
            let dark_minus = dark & 2 == 2;
            let w = weight
                * if dark_plus { p_dark } else { 1.0 - p_dark }
                * if dark_minus { p_dark } else { 1.0 - p_dark };
            let plus = hit_plus || dark_plus;
            let minus = hit_minus || dark_minus;
            if minus && !plus {
                acc += w;
            }
            if minus && plus {
                double += w;
            }
        }
    }
    (acc, double)
}

/// A uniformly perturbed strategy meeting the forwarding and visibility
/// conditions of `system` exactly, or `None` when the draw leaves the box.
pub fn random_feasible_strategy<R: Rng>(system: &ConstraintSystem, rng: &mut R) -> Option<PnsStrategy> {
    let setup = system.setup();
    let mu = setup.mu;
    let n_max = system.n_max();
    let p = |n: usize| poisson(n, mu);
    let (d_tilde, p_u1) = if system.needs_unitary() {
        let d = rng.gen_range(0.001..=0.5);
        (d, system.unitary_probability(d))
    } else {
        (0.0, 0.0)
    };
    if p_u1 > 1.0 {
        return None;
    }
    let [_, target_one, target_two] = system.targets().p_fwd;
    // two-photon condition: split the required mass between p_i32 and the
    // discrimination attacks on n >= 4
    let mut remaining = target_two;
    let mut p_s = vec![0.0; n_max - 1];
    let budget: f64 = rng.gen();
    for n in 4..=n_max {
        let rate = p(n) * usd_success(n);
        let deficit = (rng.gen::<f64>() * budget * target_two / rate).min(rng.gen::<f64>());
        p_s[n - 2] = 1.0 - deficit;
        remaining -= rate * deficit;
    }
    let ok3 = usd_success(3);
    let p_i32 = remaining / (p(3) * ok3);
    if !(0.0..=1.0).contains(&p_i32) {
        return None;
    }
    let p_s3 = rng.gen_range(0.0..=1.0 - p_i32);
    p_s[1] = p_s3;
    let rest = p(1) * p_u1
        + p(3) * ((1.0 - ok3) * p_s3 + ok3 * (1.0 - p_i32))
        + (4..=n_max).map(|n| p(n) * p_s[n - 2]).sum::<f64>();
    let p_s2 = (target_one - rest) / p(2);
    if !(0.0..=1.0).contains(&p_s2) {
        return None;
    }
    p_s[0] = p_s2;
    PnsStrategy::new(p_u1, p_s, p_i32, d_tilde).ok()
}

/// Residuals `lhs - rhs` of the five statistics Eve must reproduce:
/// no click, conclusive and double clicks in the `x` basis, conclusive and
/// double clicks in the `z` basis.
pub fn full_constraint_residuals(system: &ConstraintSystem, strategy: &PnsStrategy) -> [f64; 5] {
    let setup = system.setup();
    let v = setup.visibility;
    let forwarded = system.forward_distribution(strategy).p_fwd;
    let p_be = [1.0 - forwarded[1] - forwarded[2], forwarded[1], forwarded[2]];
    let m = setup.mean_received();
    let eve = |f: &dyn Fn(usize) -> f64| -> f64 { p_be.iter().enumerate().map(|(n, w)| w * f(n)).sum() };
    let honest = |f: &dyn Fn(usize) -> f64| -> f64 { series(m, f) };
    let q1 = poisson(1, setup.mu) * strategy.p_u1;
    let v_tilde = 1.0 - 2.0 * strategy.d_tilde;
    [
        eve(&|n| p_zero_click(n, setup)) - honest(&|n| p_zero_click(n, setup)),
        eve(&|n| p_acc_x(n, setup)) - honest(&|n| p_acc_x(n, setup)),
        eve(&|n| p_double_x(n, setup)) - honest(&|n| p_double_x(n, setup)),
        eve(&|n| p_acc_z(n, 1.0, setup)) + q1 * (p_acc_z(1, v_tilde, setup) - p_acc_z(1, 1.0, setup))
            - honest(&|n| p_acc_z(n, v, setup)),
        eve(&|n| p_double_z(n, 1.0, setup)) + q1 * (p_double_z(1, v_tilde, setup) - p_double_z(1, 1.0, setup))
            - honest(&|n| p_double_z(n, v, setup)),
    ]
}
