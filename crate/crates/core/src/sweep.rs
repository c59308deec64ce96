//! Optimization of Alice's mean photon number and flip probability per
//! distance, distance sweeps, closed-form approximations and the
//! single-photon comparison table.

use serde::Serialize;

use crate::detection::{info_ab, rates, DeviceParams, OpticalSetup};
use crate::error::{check_range, QkdError, Result};
use crate::exec::Execution;
use crate::incoherent::{upper_rate, visibility_qber};
use crate::lower_bound::{r1, LowerBoundOptions, Protocol};
use crate::optim::{golden_max, linspace, logspace, scan_then_refine};
use crate::pns::{
    maximize_eve, maximize_eve_with, storage_info, ConstraintSystem, EveOptimum, EveOptions, PnsStrategy, UnitaryTable,
};
use crate::qmath::{h2, poisson};

/// Rates at or below this are treated as zero.
pub const POSITIVE_RATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PracticalOptions {
    pub eve: EveOptions,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    /// Refinement tolerance on `ln mu`.
    pub mu_tol: f64,
    pub q_grid: Vec<f64>,
    pub q_tol: f64,
    pub preprocessing: bool,
    /// Scheduling of independent distances in [`sweep`].
    pub execution: Execution,
}

impl Default for PracticalOptions {
    fn default() -> Self {
        Self {
            eve: EveOptions::default(),
            mu_min: 0.01,
            mu_max: 3.0,
            mu_points: 120,
            mu_tol: 1e-4,
            q_grid: linspace(0.0, 0.475, 20),
            q_tol: 1e-4,
            preprocessing: true,
            execution: Execution::Parallel,
        }
    }
}

/// Optimum at one distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub distance_km: f64,
    pub mu_opt: f64,
    pub q_opt: f64,
    pub r_sk: f64,
    pub qber: f64,
    pub eve_strategy: Option<PnsStrategy>,
    pub feasible: bool,
    /// Feasible, but no positive rate is achievable.
    pub past_limit: bool,
}

impl SweepRecord {
    fn infeasible(distance_km: f64) -> Self {
        Self {
            distance_km,
            mu_opt: f64::NAN,
            q_opt: f64::NAN,
            r_sk: f64::NAN,
            qber: f64::NAN,
            eve_strategy: None,
            feasible: false,
            past_limit: false,
        }
    }

    /// Feasible with a strictly positive rate.
    pub fn has_key(&self) -> bool {
        self.feasible && !self.past_limit
    }
}

/// Rate and Eve's optimum at a fixed operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub mu: f64,
    pub q: f64,
    pub r_sk: f64,
    pub eve: EveOptimum,
}

/// `I(A':B) - max I(A':E)` at fixed `(mu, q)`.
pub fn rate_at(setup: &OpticalSetup, q: f64, opts: &PracticalOptions) -> Result<OperatingPoint> {
    let system = ConstraintSystem::new(setup, opts.eve.n_max, opts.eve.forward_model)?;
    let eve = maximize_eve(&system, q, &opts.eve)?;
    Ok(OperatingPoint {
        mu: setup.mu,
        q,
        r_sk: info_ab(setup, q)? - eve.info,
        eve,
    })
}

/// Best flip probability at fixed `mu`; `None` when Eve cannot meet the
/// constraints.
pub fn best_over_q(setup: &OpticalSetup, opts: &PracticalOptions) -> Result<Option<OperatingPoint>> {
    let table = unitary_table_for(setup.visibility, opts)?;
    best_over_q_with(setup, opts, table.as_ref())
}

fn unitary_table_for(visibility: f64, opts: &PracticalOptions) -> Result<Option<UnitaryTable>> {
    if visibility < 1.0 {
        Ok(Some(UnitaryTable::new(&opts.eve)?))
    } else {
        Ok(None)
    }
}

fn best_over_q_with(setup: &OpticalSetup, opts: &PracticalOptions, table: Option<&UnitaryTable>) -> Result<Option<OperatingPoint>> {
    let system = ConstraintSystem::new(setup, opts.eve.n_max, opts.eve.forward_model)?;
    let at = |q: f64| -> Option<OperatingPoint> {
        let eve = maximize_eve_with(&system, q, &opts.eve, table).ok()?;
        let r_sk = info_ab(setup, q).ok()? - eve.info;
        Some(OperatingPoint { mu: setup.mu, q, r_sk, eve })
    };
    // feasibility does not depend on q
    let Some(base) = at(0.0) else {
        return Ok(None);
    };
    if !opts.preprocessing {
        return Ok(Some(base));
    }
    let grid: Vec<f64> = opts.q_grid.iter().copied().filter(|q| (0.0..0.5).contains(q)).collect();
    if grid.len() < 2 {
        return Ok(Some(base));
    }
    let best = scan_then_refine(
        |q| {
            if q == 0.0 {
                base.r_sk
            } else {
                at(q).map_or(f64::NEG_INFINITY, |p| p.r_sk)
            }
        },
        &grid,
        opts.q_tol,
    );
    if best.arg == 0.0 || best.value <= base.r_sk {
        return Ok(Some(base));
    }
    Ok(at(best.arg).or(Some(base)))
}

/// Maximizes the key rate over `mu` and `q` at one distance.
pub fn optimize_point(distance: f64, visibility: f64, device: &DeviceParams, opts: &PracticalOptions) -> Result<SweepRecord> {
    check_range("visibility", visibility, 0.0, 1.0, "[0, 1]")?;
    device.validate()?;
    let setup_at = |mu: f64| OpticalSetup::new(*device, distance, visibility, mu);
    setup_at(opts.mu_min)?;
    let table = unitary_table_for(visibility, opts)?;
    let rate = |ln_mu: f64| -> Option<OperatingPoint> {
        let s = setup_at(ln_mu.exp()).ok()?;
        best_over_q_with(&s, opts, table.as_ref()).ok().flatten()
    };
    let grid: Vec<f64> = logspace(opts.mu_min, opts.mu_max, opts.mu_points.max(2))
        .into_iter()
        .map(f64::ln)
        .collect();
    let scanned: Vec<Option<OperatingPoint>> = grid.iter().map(|&x| rate(x)).collect();
    let values: Vec<f64> = scanned
        .iter()
        .map(|p| p.as_ref().map_or(f64::NEG_INFINITY, |p| p.r_sk))
        .collect();
    let Some((best_i, _)) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |acc: Option<(usize, f64)>, (i, &v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
    else {
        return Ok(SweepRecord::infeasible(distance));
    };
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let refined = golden_max(|x| rate(x).map_or(f64::NEG_INFINITY, |p| p.r_sk), lo, hi, opts.mu_tol);
    let mut best = scanned[best_i].clone().expect("finite value has a point");
    if refined.value > best.r_sk {
        if let Some(p) = rate(refined.arg) {
            best = p;
        }
    }
    let setup = setup_at(best.mu)?;
    Ok(SweepRecord {
        distance_km: distance,
        mu_opt: best.mu,
        q_opt: best.q,
        r_sk: best.r_sk,
        qber: rates(&setup).qber,
        eve_strategy: Some(best.eve.strategy),
        feasible: true,
        past_limit: best.r_sk <= POSITIVE_RATE_FLOOR,
    })
}

/// Distances `d_min, d_min + step, ...` up to `d_max` inclusive.
pub fn distance_grid(d_min: f64, d_max: f64, step: f64) -> Result<Vec<f64>> {
    check_range("d_min", d_min, 0.0, f64::MAX, "[0, inf)")?;
    if !(step > 0.0 && step.is_finite()) || !(d_max >= d_min && d_max.is_finite()) {
        return Err(QkdError::Domain {
            name: "sweep",
            value: step,
            domain: "d_min <= d_max and step > 0",
        });
    }
    let count = ((d_max - d_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| d_min + step * i as f64).collect())
}

/// Independent [`optimize_point`] per distance, ordered by distance.
pub fn sweep(
    d_min: f64,
    d_max: f64,
    step: f64,
    visibility: f64,
    device: &DeviceParams,
    opts: &PracticalOptions,
) -> Result<Vec<SweepRecord>> {
    let distances = distance_grid(d_min, d_max, step)?;
    opts.execution
        .map(&distances, |&d| optimize_point(d, visibility, device, opts))
        .into_iter()
        .collect()
}

/// A neighbouring pair that breaks the expected decrease of `mu_opt` or
/// `r_sk` with distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub quantity: &'static str,
    pub from_km: f64,
    pub to_km: f64,
}

/// Checks that `mu_opt` and `r_sk` do not grow by more than `rel_tol`
/// between consecutive records with a positive rate.
pub fn check_monotone(records: &[SweepRecord], rel_tol: f64) -> Vec<MonotonicityViolation> {
    let keyed: Vec<&SweepRecord> = records.iter().filter(|r| r.has_key()).collect();
    let mut out = Vec::new();
    for pair in keyed.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.mu_opt > a.mu_opt * (1.0 + rel_tol) {
            out.push(MonotonicityViolation { quantity: "mu_opt", from_km: a.distance_km, to_km: b.distance_km });
        }
        if b.r_sk > a.r_sk * (1.0 + rel_tol) {
            out.push(MonotonicityViolation { quantity: "r_sk", from_km: a.distance_km, to_km: b.distance_km });
        }
    }
    out
}

/// Last distance with a rate above [`POSITIVE_RATE_FLOOR`].
pub fn limiting_distance(records: &[SweepRecord]) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.feasible && r.r_sk > POSITIVE_RATE_FLOOR)
        .map(|r| r.distance_km)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
}

/// First feasible distance.
pub fn feasibility_onset(records: &[SweepRecord]) -> Option<f64> {
    records.iter().find(|r| r.feasible).map(|r| r.distance_km)
}

/// Small-`mu t` model where Eve stores every multi-photon pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiAnalytic {
    pub mu_opt: f64,
    pub r_sk: f64,
}

/// Closed-form approximations at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxModel {
    pub transmission: f64,
    pub mu_approx: f64,
    pub r_approx: f64,
    pub mu_critical: f64,
    pub semi_analytic: SemiAnalytic,
}

/// `(eta/4)(1 - I_S(1))(mu t - mu^3/12)`.
pub fn approx_rate(mu: f64, transmission: f64, eta: f64) -> f64 {
    0.25 * eta * (1.0 - storage_info(1, 0.0)) * (mu * transmission - mu.powi(3) / 12.0)
}

/// Semi-analytic rate: dark-count QBER and storage-only information.
pub fn semi_analytic_rate(mu: f64, transmission: f64, device: &DeviceParams, n_max: usize) -> f64 {
    let (eta, pd) = (device.eta, device.p_dark);
    let x = mu * transmission * eta;
    let qber = 1.0 / (2.0 + x / (2.0 * pd));
    let i_ab = (0.25 * x + pd) * (1.0 - h2(qber));
    let s1 = storage_info(1, 0.0);
    let mut i_ae = mu * transmission * s1 + 0.5 * poisson(3, mu) * (1.0 - s1);
    for n in 4..=n_max {
        i_ae += poisson(n, mu) * (storage_info(n - 1, 0.0) - s1);
    }
    i_ab - 0.25 * eta * i_ae
}

pub fn approx_point(distance: f64, device: &DeviceParams, n_max: usize) -> Result<ApproxModel> {
    device.validate()?;
    check_range("distance", distance, 0.0, f64::MAX, "[0, inf)")?;
    let t = device.transmission(distance);
    let mu_approx = 2.0 * t.sqrt();
    let grid: Vec<f64> = logspace(0.01, 3.0, 120).into_iter().map(f64::ln).collect();
    let best = scan_then_refine(|x| semi_analytic_rate(x.exp(), t, device, n_max), &grid, 1e-8);
    Ok(ApproxModel {
        transmission: t,
        mu_approx,
        r_approx: device.eta / 3.0 * (1.0 - storage_info(1, 0.0)) * t.powf(1.5),
        mu_critical: 2.0 * (3.0 * t).sqrt(),
        semi_analytic: SemiAnalytic {
            mu_opt: best.arg.exp(),
            r_sk: best.value,
        },
    })
}

/// Single-photon bounds at one QBER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub qber: f64,
    pub sarg04_lower: f64,
    pub sarg04_upper: f64,
    pub bb84_lower: f64,
    /// Visibility that produces this QBER in SARG04.
    pub sarg04_visibility: f64,
    /// Visibility that produces this QBER in BB84.
    pub bb84_visibility: f64,
}

pub fn comparison_table(qber_grid: &[f64], opts: &LowerBoundOptions) -> Result<Vec<ComparisonRow>> {
    qber_grid
        .iter()
        .map(|&qber| {
            Ok(ComparisonRow {
                qber,
                sarg04_lower: r1(Protocol::Sarg04, qber, true, opts)?.r,
                sarg04_upper: upper_rate(qber, true)?.r_sk,
                bb84_lower: r1(Protocol::Bb84, qber, true, opts)?.r,
                sarg04_visibility: (1.0 - 2.0 * qber) / (1.0 - qber),
                bb84_visibility: 1.0 - 2.0 * qber,
            })
        })
        .collect()
}

/// QBER of both protocols at one visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityRow {
    pub visibility: f64,
    pub sarg04_qber: f64,
    pub bb84_qber: f64,
}

pub fn visibility_table(visibility_grid: &[f64]) -> Result<Vec<VisibilityRow>> {
    visibility_grid
        .iter()
        .map(|&v| {
            Ok(VisibilityRow {
                visibility: v,
                sarg04_qber: visibility_qber(Protocol::Sarg04, v)?,
                bb84_qber: visibility_qber(Protocol::Bb84, v)?,
            })
        })
        .collect()
}
