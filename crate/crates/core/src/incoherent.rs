//! Eve's single-photon incoherent attack: a fixed unitary ansatz
//! parametrized by the disturbance `D`, Helstrom discrimination of her
//! conditional states and the resulting upper bound on the key rate.

use serde::Serialize;

use crate::error::{check_range, QkdError, Result};
use crate::lower_bound::Protocol;
use crate::optim::{bisect_sign_change, linspace, scan_then_refine};
use crate::qmath::{h2, jacobi_eigen, SymmetricMatrix};

/// QBER caused by disturbance `D`: `D / (1/2 + D)`.
pub fn qber_from_disturbance(disturbance: f64) -> Result<f64> {
    check_range("disturbance", disturbance, 0.0, 0.5, "[0, 0.5]")?;
    Ok(disturbance / (0.5 + disturbance))
}

/// Inverse of [`qber_from_disturbance`]: `Q / (2 (1 - Q))`.
pub fn disturbance_from_qber(qber: f64) -> Result<f64> {
    if !(qber.is_finite() && (0.0..0.5).contains(&qber)) {
        return Err(QkdError::Domain {
            name: "qber",
            value: qber,
            domain: "[0, 0.5)",
        });
    }
    Ok(qber / (2.0 * (1.0 - qber)))
}

/// QBER seen at channel visibility `V`.
pub fn visibility_qber(protocol: Protocol, visibility: f64) -> Result<f64> {
    check_range("visibility", visibility, 0.0, 1.0, "[0, 1]")?;
    Ok(match protocol {
        Protocol::Bb84 => 0.5 * (1.0 - visibility),
        Protocol::Sarg04 | Protocol::Sarg04TwoSet => (1.0 - visibility) / (2.0 - visibility),
    })
}

/// Eve's unnormalized post-sifting states in the span
/// `{|00>, |01>, |10>}`, indexed by Alice's and Bob's bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackUnitaryState {
    pub disturbance: f64,
    /// Order: `(a, b) = (0,0), (0,1), (1,0), (1,1)`.
    pub eve_vectors: [[f64; 3]; 4],
}

impl AttackUnitaryState {
    pub fn vector(&self, alice: usize, bob: usize) -> &[f64; 3] {
        &self.eve_vectors[2 * alice + bob]
    }

    pub fn squared_norms(&self) -> [f64; 4] {
        self.eve_vectors.map(|v| v.iter().map(|x| x * x).sum())
    }
}

pub fn build_attack(disturbance: f64) -> Result<AttackUnitaryState> {
    check_range("disturbance", disturbance, 0.0, 0.5, "[0, 0.5]")?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = (1.0 - 2.0 * disturbance).max(0.0).sqrt() * s;
    let b = disturbance.sqrt() * s;
    let r = disturbance.sqrt();
    Ok(AttackUnitaryState {
        disturbance,
        eve_vectors: [[a, b, -b], [0.0, 0.0, r], [0.0, r, 0.0], [a, -b, b]],
    })
}

/// Whose bit Eve tries to guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    Alice,
    Bob,
}

/// Outcome statistics of the Helstrom measurement, ordered
/// `E = 0, +, -` (null, positive and negative eigenvalue of `M`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelstromResult {
    pub outcome_probs: [f64; 3],
    /// `p(target bit = 0 | E = e)` after the flip preprocessing.
    pub posteriors: [f64; 3],
    pub info: f64,
    /// Spectrum of `M = rho(0) - rho(1)` in the same order.
    pub eigenvalues: [f64; 3],
}

impl HelstromResult {
    /// `(1 - p(E=0)) (1 - h(p_guess))`, valid when the null outcome is
    /// uninformative.
    pub fn info_rewritten(&self) -> f64 {
        (1.0 - self.outcome_probs[0]) * (1.0 - h2(self.posteriors[1]))
    }
}

/// Closed-form spectrum of `M`: `(0, +l, -l)` with
/// `l = 2 sqrt(D (2 - 3D)) / (1 + 2D)`.
pub fn helstrom_eigenvalues_closed_form(disturbance: f64) -> [f64; 3] {
    let d = disturbance;
    let l = 2.0 * (d * (2.0 - 3.0 * d)).max(0.0).sqrt() / (1.0 + 2.0 * d);
    [0.0, l, -l]
}

fn conditional_state(vectors: [&[f64; 3]; 2], norm: f64) -> SymmetricMatrix {
    let used: Vec<&[f64]> = vectors
        .iter()
        .filter(|v| v.iter().any(|x| *x != 0.0))
        .map(|v| v.as_slice())
        .collect();
    if used.is_empty() {
        return SymmetricMatrix::zeros(3);
    }
    SymmetricMatrix::from_outer_products(&used).scaled(1.0 / norm)
}

pub fn helstrom_info(state: &AttackUnitaryState, target: Target, q: f64) -> Result<HelstromResult> {
    check_range("q", q, 0.0, 0.5, "[0, 0.5]")?;
    let norm = 0.5 + state.disturbance;
    let (rho0, rho1) = match target {
        Target::Alice => (
            conditional_state([state.vector(0, 0), state.vector(0, 1)], norm),
            conditional_state([state.vector(1, 0), state.vector(1, 1)], norm),
        ),
        Target::Bob => (
            conditional_state([state.vector(0, 0), state.vector(1, 0)], norm),
            conditional_state([state.vector(0, 1), state.vector(1, 1)], norm),
        ),
    };
    let m = rho0.sub(&rho1);
    let eig = jacobi_eigen(&m)?;
    // descending order: positive, null, negative
    let order = [1usize, 0, 2];
    let mut outcome_probs = [0.0; 3];
    let mut posteriors = [0.5; 3];
    let mut eigenvalues = [0.0; 3];
    let mut info = 1.0;
    for (slot, &k) in order.iter().enumerate() {
        let v = &eig.vectors[k];
        let p0 = 0.5 * rho0.quadratic_form(v).max(0.0);
        let p1 = 0.5 * rho1.quadratic_form(v).max(0.0);
        let pe = p0 + p1;
        eigenvalues[slot] = eig.values[k];
        outcome_probs[slot] = pe;
        if pe > 0.0 {
            let post = p0 / pe;
            posteriors[slot] = (1.0 - q) * post + q * (1.0 - post);
        }
        info -= pe * h2(posteriors[slot]);
    }
    Ok(HelstromResult {
        outcome_probs,
        posteriors,
        info,
        eigenvalues,
    })
}

/// `I(A':E)` of the unitary attack at disturbance `D` and flip `q`.
pub fn unitary_attack_info(disturbance: f64, q: f64) -> Result<f64> {
    Ok(helstrom_info(&build_attack(disturbance)?, Target::Alice, q)?.info)
}

const MAX_FLIP: f64 = 0.499;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperRate {
    pub r_sk: f64,
    pub q_opt: f64,
}

fn upper_rate_at(qber: f64, disturbance: f64, q: f64) -> f64 {
    let flipped = (1.0 - q) * qber + q * (1.0 - qber);
    1.0 - h2(flipped) - unitary_attack_info(disturbance, q).unwrap_or(f64::NAN)
}

/// Csiszar-Korner rate `1 - h(Q') - I(A':E)` under the attack that
/// produces `Q`, maximized over `q in [0, 0.5)` when requested.
pub fn upper_rate(qber: f64, optimize_q: bool) -> Result<UpperRate> {
    check_range("qber", qber, 0.0, 0.45, "[0, 0.45]")?;
    let d = disturbance_from_qber(qber)?;
    if !optimize_q {
        return Ok(UpperRate {
            r_sk: upper_rate_at(qber, d, 0.0),
            q_opt: 0.0,
        });
    }
    // the rate vanishes like (1 - 2q)^2 at q = 1/2; stopping short keeps
    // its sign above rounding noise
    let mut grid = linspace(0.0, 0.495, 100);
    grid.push(MAX_FLIP);
    let best = scan_then_refine(|q| upper_rate_at(qber, d, q.clamp(0.0, MAX_FLIP)), &grid, 1e-9);
    Ok(UpperRate {
        r_sk: best.value,
        q_opt: best.arg,
    })
}

/// QBER where [`upper_rate`] changes sign, searched on `[0.10, 0.20]`.
pub fn upper_threshold(optimize_q: bool) -> Result<f64> {
    bisect_sign_change(
        |qber| upper_rate(qber, optimize_q).is_ok_and(|r| r.r_sk > 0.0),
        0.10,
        0.20,
        1e-5,
    )
    .ok_or_else(|| QkdError::Infeasible("upper bound does not change sign on [0.10, 0.20]".into()))
}
