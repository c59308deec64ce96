//! Attenuated-laser source, lossy depolarizing channel and Bob's two
//! threshold detectors.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, QkdError, Result};
use crate::qmath::h2;

/// Detector and fibre parameters shared by every distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Fibre attenuation in dB/km.
    pub alpha: f64,
    pub eta: f64,
    pub p_dark: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            eta: 0.1,
            p_dark: 1e-5,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        check_range("alpha", self.alpha, 0.0, f64::MAX, "[0, inf)")?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(QkdError::Domain {
                name: "eta",
                value: self.eta,
                domain: "(0, 1]",
            });
        }
        if !(self.p_dark >= 0.0 && self.p_dark < 1.0) {
            return Err(QkdError::Domain {
                name: "p_dark",
                value: self.p_dark,
                domain: "[0, 1)",
            });
        }
        Ok(())
    }

    /// Fibre transmission `10^(-alpha d / 10)`.
    pub fn transmission(&self, distance_km: f64) -> f64 {
        10f64.powf(-self.alpha * distance_km / 10.0)
    }
}

/// Complete description of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSetup {
    pub alpha: f64,
    pub distance: f64,
    pub visibility: f64,
    pub eta: f64,
    pub p_dark: f64,
    pub mu: f64,
}

impl OpticalSetup {
    pub fn new(device: DeviceParams, distance: f64, visibility: f64, mu: f64) -> Result<Self> {
        device.validate()?;
        check_range("distance", distance, 0.0, f64::MAX, "[0, inf)")?;
        check_range("visibility", visibility, 0.0, 1.0, "[0, 1]")?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(QkdError::Domain {
                name: "mu",
                value: mu,
                domain: "(0, inf)",
            });
        }
        Ok(Self {
            alpha: device.alpha,
            distance,
            visibility,
            eta: device.eta,
            p_dark: device.p_dark,
            mu,
        })
    }

    pub fn device(&self) -> DeviceParams {
        DeviceParams {
            alpha: self.alpha,
            eta: self.eta,
            p_dark: self.p_dark,
        }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.device(), self.distance, self.visibility, mu)
    }

    pub fn transmission(&self) -> f64 {
        self.device().transmission(self.distance)
    }

    /// `F = (1 + V) / 2`.
    pub fn fidelity(&self) -> f64 {
        0.5 * (1.0 + self.visibility)
    }

    /// `D = (1 - V) / 2`.
    pub fn disturbance(&self) -> f64 {
        0.5 * (1.0 - self.visibility)
    }

    /// Mean photon number reaching Bob, `mu t`.
    pub fn mean_received(&self) -> f64 {
        self.mu * self.transmission()
    }
}

fn pow_n(base: f64, n: usize) -> f64 {
    base.powi(n as i32)
}

/// No click on either detector for an `n`-photon input.
pub fn p_zero_click(n: usize, setup: &OpticalSetup) -> f64 {
    (1.0 - setup.p_dark).powi(2) * pow_n(1.0 - setup.eta, n)
}

/// Conclusive click (only the detector orthogonal to Alice's state) when
/// Bob measures in the basis of her state, at visibility `v`.
pub fn p_acc_z(n: usize, v: f64, setup: &OpticalSetup) -> f64 {
    let f = 0.5 * (1.0 + v);
    let pd = setup.p_dark;
    (1.0 - pd) * (pow_n(1.0 - f * setup.eta, n) - (1.0 - pd) * pow_n(1.0 - setup.eta, n))
}

/// Conclusive click when Bob measures in the other basis.
pub fn p_acc_x(n: usize, setup: &OpticalSetup) -> f64 {
    p_acc_z(n, 0.0, setup)
}

/// Probability that Bob accepts an `n`-photon pulse.
pub fn p_acc(n: usize, v: f64, setup: &OpticalSetup) -> f64 {
    0.5 * (p_acc_x(n, setup) + p_acc_z(n, v, setup))
}

/// Double click in Alice's basis at visibility `v`.
pub fn p_double_z(n: usize, v: f64, setup: &OpticalSetup) -> f64 {
    let (f, d) = (0.5 * (1.0 + v), 0.5 * (1.0 - v));
    let pd = setup.p_dark;
    let eta = setup.eta;
    1.0 - (1.0 - pd) * (pow_n(1.0 - f * eta, n) + pow_n(1.0 - d * eta, n))
        + (1.0 - pd).powi(2) * pow_n(1.0 - eta, n)
}

/// Double click in the other basis.
pub fn p_double_x(n: usize, setup: &OpticalSetup) -> f64 {
    p_double_z(n, 0.0, setup)
}

/// Poisson-averaged click statistics per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBundle {
    pub c0: f64,
    pub c_acc_x: f64,
    pub c_acc_z: f64,
    pub c_acc: f64,
    pub c2_x: f64,
    pub c2_z: f64,
    pub qber: f64,
}

pub fn rates(setup: &OpticalSetup) -> RateBundle {
    let x = setup.mean_received() * setup.eta;
    let pd = setup.p_dark;
    let f = setup.fidelity();
    let d = setup.disturbance();
    let none = (-x).exp();
    let c_acc_z = (1.0 - pd) * ((-f * x).exp() - (1.0 - pd) * none);
    let c_acc_x = (1.0 - pd) * ((-0.5 * x).exp() - (1.0 - pd) * none);
    let c_acc = 0.5 * (c_acc_x + c_acc_z);
    let c2_z = 1.0 - (1.0 - pd) * ((-f * x).exp() + (-d * x).exp()) + (1.0 - pd).powi(2) * none;
    let c2_x = (1.0 - (1.0 - pd) * (-0.5 * x).exp()).powi(2);
    RateBundle {
        c0: (1.0 - pd).powi(2) * none,
        c_acc_x,
        c_acc_z,
        c_acc,
        c2_x,
        c2_z,
        qber: if c_acc > 0.0 { 0.5 * c_acc_z / c_acc } else { 0.0 },
    }
}

/// `I(A':B)` per pulse: `C_acc (1 - h(Q'))`.
pub fn info_ab(setup: &OpticalSetup, q: f64) -> Result<f64> {
    check_range("q", q, 0.0, 0.5, "[0, 0.5]")?;
    let r = rates(setup);
    let flipped = (1.0 - q) * r.qber + q * (1.0 - r.qber);
    Ok(r.c_acc * (1.0 - h2(flipped)))
}
