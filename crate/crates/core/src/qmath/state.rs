use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

const WEIGHT_SLACK: f64 = 1e-12;

/// Bell-diagonal two-qubit state with weights on
/// `(Phi+, Phi-, Psi+, Psi-)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonal {
    weights: [f64; 4],
}

impl BellDiagonal {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights
            .iter()
            .any(|w| !w.is_finite() || *w < -WEIGHT_SLACK)
        {
            return Err(QkdError::InvalidState(format!(
                "negative Bell weight in {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(QkdError::InvalidState(format!(
                "Bell weights sum to {total}"
            )));
        }
        Ok(Self {
            weights: weights.map(|w| w.max(0.0)),
        })
    }

    /// Normalizes arbitrary non-negative weights by their sum.
    pub fn from_unnormalized(weights: [f64; 4]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(QkdError::InvalidState("zero-trace state".into()));
        }
        Self::new(weights.map(|w| w / total))
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    /// Error rate in the computational basis, `w(Psi+) + w(Psi-)`.
    pub fn qber(&self) -> f64 {
        self.weights[2] + self.weights[3]
    }

    pub fn density_matrix(&self) -> DensityMatrix4 {
        let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (w, b) in self.weights.iter().zip(bell_basis()) {
            for i in 0..4 {
                for j in 0..4 {
                    rho[i][j] += *w * b[i] * b[j];
                }
            }
        }
        rho
    }
}

/// Two-qubit density operator in the basis `|00>, |01>, |10>, |11>`.
pub type DensityMatrix4 = [[Complex64; 4]; 4];

fn bell_basis() -> [[f64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [s, 0.0, 0.0, s],
        [s, 0.0, 0.0, -s],
        [0.0, s, s, 0.0],
        [0.0, s, -s, 0.0],
    ]
}

/// Unnormalized Bell-basis populations `<beta|rho|beta>`.
pub fn bell_diagonal(rho: &DensityMatrix4) -> [f64; 4] {
    bell_basis().map(|b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += b[i] * rho[i][j] * b[j];
            }
        }
        acc.re
    })
}

/// Which announced-set family the sifting uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiftProtocol {
    /// All four sets `{|sigma z>, |omega x>}`.
    FourSet,
    /// Only the sets with `sigma = omega`.
    TwoSet,
}

impl SiftProtocol {
    fn signs(self) -> &'static [(f64, f64)] {
        match self {
            SiftProtocol::FourSet => &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)],
            SiftProtocol::TwoSet => &[(1.0, 1.0), (-1.0, -1.0)],
        }
    }
}

type Op2 = [[Complex64; 2]; 2];

fn ket_z(sigma: f64) -> [f64; 2] {
    if sigma > 0.0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

fn ket_x(omega: f64) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [s, omega * s]
}

fn op_from_rows(r0: [f64; 2], r1: [f64; 2], c0: f64, c1: f64) -> Op2 {
    [
        [Complex64::new(c0 * r0[0], 0.0), Complex64::new(c0 * r0[1], 0.0)],
        [Complex64::new(c1 * r1[0], 0.0), Complex64::new(c1 * r1[1], 0.0)],
    ]
}

/// Alice's sifting filter `|0><sigma z| + |1><omega x|`.
fn alice_filter(sigma: f64, omega: f64) -> Op2 {
    op_from_rows(ket_z(sigma), ket_x(omega), 1.0, 1.0)
}

/// Bob's sifting filter `(sigma |0><-omega x| + omega |1><-sigma z|) / sqrt 2`.
fn bob_filter(sigma: f64, omega: f64) -> Op2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    op_from_rows(ket_x(-omega), ket_z(-sigma), sigma * s, omega * s)
}

fn kron(a: &Op2, b: &Op2) -> DensityMatrix4 {
    let mut k = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    k[2 * i + r][2 * j + c] = a[i][j] * b[r][c];
                }
            }
        }
    }
    k
}

fn conjugate_into(acc: &mut DensityMatrix4, k: &DensityMatrix4, rho: &DensityMatrix4) {
    let mut kr = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for m in 0..4 {
                kr[i][j] += k[i][m] * rho[m][j];
            }
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            for m in 0..4 {
                acc[i][j] += kr[i][m] * k[j][m].conj();
            }
        }
    }
}

/// Applies the sifting filters to a two-qubit state and returns the
/// normalized Bell-diagonal part of the result.
pub fn sift_map(rho: &DensityMatrix4, protocol: SiftProtocol) -> Result<BellDiagonal> {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for &(sigma, omega) in protocol.signs() {
        let k = kron(&alice_filter(sigma, omega), &bob_filter(sigma, omega));
        conjugate_into(&mut out, &k, rho);
    }
    BellDiagonal::from_unnormalized(bell_diagonal(&out))
}

/// Closed-form sifted weights in terms of populations of the input state.
pub fn sift_map_closed_form(rho: &DensityMatrix4, protocol: SiftProtocol) -> Result<BellDiagonal> {
    let [phi_p, phi_m, psi_p, psi_m] = bell_diagonal(rho);
    let w = match protocol {
        SiftProtocol::FourSet => [
            phi_p,
            psi_m + phi_m + psi_p,
            0.5 * (phi_m + psi_p),
            0.5 * (4.0 * psi_m + phi_m + psi_p),
        ],
        SiftProtocol::TwoSet => {
            // chi+- = (Phi- +- Psi+) / sqrt 2 = (1, +-1, +-1, -1) / 2
            let chi = |sign: f64| {
                let b = [0.5, 0.5 * sign, 0.5 * sign, -0.5];
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        acc += b[i] * rho[i][j] * b[j];
                    }
                }
                acc.re
            };
            let (chi_p, chi_m) = (chi(1.0), chi(-1.0));
            [phi_p, psi_m + 2.0 * chi_m, chi_p, 2.0 * psi_m + chi_m]
        }
    };
    BellDiagonal::from_unnormalized(w)
}
