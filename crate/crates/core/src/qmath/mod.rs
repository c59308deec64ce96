//! Numerical primitives: entropies, small symmetric eigenproblems,
//! photon-number statistics and two-qubit Bell-diagonal states.

mod eigen;
mod photon;
mod state;

pub use eigen::{eigen_2x2, jacobi_eigen, Eigen, SymmetricMatrix};
pub use photon::{poisson, PhotonDistribution};
pub use state::{
    bell_diagonal, sift_map, sift_map_closed_form, BellDiagonal, DensityMatrix4, SiftProtocol,
};

use crate::error::{QkdError, Result};

/// Slack allowed on probabilities and eigenvalues produced by rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(p.is_finite() && (-ROUNDING_SLACK..=1.0 + ROUNDING_SLACK).contains(&p)) {
        return Err(QkdError::Domain {
            name: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    let p = p.clamp(0.0, 1.0);
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// Binary entropy for arguments already known to lie in [0, 1].
pub(crate) fn h2(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    let mut acc = 0.0;
    for &p in probs {
        if !(p.is_finite() && p >= -ROUNDING_SLACK) {
            return Err(QkdError::Domain {
                name: "probability",
                value: p,
                domain: "[0, 1]",
            });
        }
        total += p;
        acc -= xlog2x(p.max(0.0));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(QkdError::InvalidState(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(acc)
}

/// Most negative eigenvalue accepted as rounding noise in a density matrix.
pub const PSD_SLACK: f64 = 1e-8;

/// Entropy in bits of a density operator given its spectrum.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &l in eigenvalues {
        if !l.is_finite() || l < -PSD_SLACK {
            return Err(QkdError::NotPositiveSemidefinite(l));
        }
        acc -= xlog2x(l.max(0.0));
    }
    Ok(acc)
}

/// Von Neumann entropy in bits of a real symmetric density matrix.
pub fn von_neumann_entropy(m: &SymmetricMatrix) -> Result<f64> {
    let tr = m.trace();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(QkdError::InvalidState(format!("trace {tr} differs from 1")));
    }
    spectrum_entropy(&jacobi_eigen(m)?.values)
}
