use crate::error::{check_range, QkdError, Result};

/// Poisson probability `p(n | mean)`; log space above n = 20.
pub fn poisson(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n > 20 {
        let log_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return (-mean + n as f64 * mean.ln() - log_fact).exp();
    }
    let mut p = (-mean).exp();
    for k in 1..=n {
        p *= mean / k as f64;
    }
    p
}

/// Photon-number distribution truncated at `n_max`, with the dropped
/// tail mass recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail: f64,
}

impl PhotonDistribution {
    pub fn poissonian(mean: f64, n_max: usize) -> Result<Self> {
        check_range("mean photon number", mean, 0.0, f64::MAX, "[0, inf)")?;
        let probs: Vec<f64> = (0..=n_max).map(|n| poisson(n, mean)).collect();
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Ok(Self { probs, tail })
    }

    /// Arbitrary distribution; the tail is whatever mass is missing.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(QkdError::InvalidState("photon probabilities outside [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(QkdError::InvalidState(format!("photon probabilities sum to {total}")));
        }
        Ok(Self {
            probs,
            tail: (1.0 - total).max(0.0),
        })
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(n)`, zero beyond the cutoff.
    pub fn probability(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    /// Distribution after each photon independently survives with
    /// probability `transmission`.
    pub fn thinned(&self, transmission: f64) -> Result<Self> {
        check_range("transmission", transmission, 0.0, 1.0, "[0, 1]")?;
        let n_max = self.n_max();
        let mut out = vec![0.0; n_max + 1];
        for (n, &pa) in self.probs.iter().enumerate() {
            let mut binom = 1.0;
            for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
                if k > 0 {
                    binom *= (n - k + 1) as f64 / k as f64;
                }
                *slot += pa
                    * binom
                    * transmission.powi(k as i32)
                    * (1.0 - transmission).powi((n - k) as i32);
            }
        }
        Self::from_probs(out)
    }
}
