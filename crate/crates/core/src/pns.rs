//! Photon-number-splitting attacks: Eve's information for a strategy,
//! the constraints that keep Bob's statistics unchanged, and the
//! maximization of her information over restricted strategies.
//!
//! Strategy per photon number `n`: unitary attack with disturbance `D~`
//! (`n = 1` only), storage (keep `n - 1` photons, forward one),
//! unambiguous discrimination (forward two photons on success, one or two
//! for `n = 3`), or blocking.

use serde::Serialize;

use crate::detection::{p_acc, OpticalSetup};
use crate::error::{QkdError, Result};
use crate::exec::Execution;
use crate::incoherent::{build_attack, helstrom_info, unitary_attack_info, Target};
use crate::lp::{LinearProgram, Row};
use crate::optim::{linspace, refine_scan, scan_then_refine};
use crate::qmath::{h2, poisson};

pub const DEFAULT_N_MAX: usize = 7;
const PROB_SLACK: f64 = 1e-9;

/// `I_S(k)`: Eve's information after storing `k` photons until the
/// sifting announcement.
pub fn storage_info(stored: usize, q: f64) -> f64 {
    let p = 0.5 + 0.5 * (1.0 - 0.5f64.powi(stored as i32)).sqrt();
    1.0 - h2((1.0 - q) * p + q * (1.0 - p))
}

/// Eve's information after a successful unambiguous discrimination.
pub fn usd_info(q: f64) -> f64 {
    1.0 - h2(q)
}

/// Success probability of unambiguous discrimination on `n >= 3` photons.
pub fn usd_success(n: usize) -> f64 {
    if n < 3 {
        return 0.0;
    }
    1.0 - 0.5f64.powi(((n - 1) / 2) as i32)
}

/// Restricted strategy: the free parameters of Eve's attack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnsStrategy {
    pub p_u1: f64,
    /// `p_s[i]` is the storage probability for `n = i + 2`.
    pub p_s: Vec<f64>,
    /// `p_I(3) r(2|3)`: discrimination on three photons forwarding two.
    pub p_i32: f64,
    pub d_tilde: f64,
    pub n_max: usize,
}

impl PnsStrategy {
    pub fn new(p_u1: f64, p_s: Vec<f64>, p_i32: f64, d_tilde: f64) -> Result<Self> {
        let s = Self {
            p_u1,
            n_max: p_s.len() + 1,
            p_s,
            p_i32,
            d_tilde,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn p_s(&self, n: usize) -> f64 {
        if n >= 2 && n <= self.n_max {
            self.p_s[n - 2]
        } else {
            0.0
        }
    }

    /// `p_I(n) = 1 - p_S(n)` for `n >= 3`.
    pub fn p_i(&self, n: usize) -> f64 {
        if n >= 3 && n <= self.n_max {
            1.0 - self.p_s(n)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(QkdError::InvalidStrategy(what));
        if self.n_max < 3 || self.p_s.len() != self.n_max - 1 {
            return bad(format!("n_max {} with {} storage entries", self.n_max, self.p_s.len()));
        }
        let unit = |p: f64| (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p);
        if !unit(self.p_u1) || !unit(self.p_i32) || self.p_s.iter().any(|p| !unit(*p)) {
            return bad("probability outside [0, 1]".into());
        }
        if !(0.0..=0.5).contains(&self.d_tilde) {
            return bad(format!("d_tilde = {}", self.d_tilde));
        }
        if self.p_s(3) + self.p_i32 > 1.0 + PROB_SLACK {
            return bad("p_s(3) + p_i32 exceeds 1".into());
        }
        Ok(())
    }

    /// Variable order of the linear program:
    /// `(p_u1, p_s(2), p_s(3), p_i32, p_s(4), ..., p_s(n_max))`.
    pub fn to_lp_vector(&self) -> Vec<f64> {
        let mut x = vec![self.p_u1, self.p_s(2), self.p_s(3), self.p_i32];
        x.extend((4..=self.n_max).map(|n| self.p_s(n)));
        x
    }

    pub fn from_lp_vector(x: &[f64], d_tilde: f64) -> Self {
        let n_max = x.len() - 1;
        let clamp = |v: f64| v.clamp(0.0, 1.0);
        let mut p_s = vec![clamp(x[1]), clamp(x[2])];
        p_s.extend(x[4..].iter().map(|&v| clamp(v)));
        Self {
            p_u1: clamp(x[0]),
            p_s,
            p_i32: clamp(x[3]),
            d_tilde,
            n_max,
        }
    }

    /// The general attack description this strategy corresponds to.
    pub fn to_plan(&self) -> AttackPlan {
        let mut per_photon = vec![PhotonAction::default(); self.n_max + 1];
        per_photon[1] = PhotonAction {
            p_storage: 0.0,
            p_usd: 0.0,
            storage_forward: vec![],
            usd_forward: vec![],
        };
        for (n, action) in per_photon.iter_mut().enumerate().skip(2) {
            let mut storage_forward = vec![0.0; n + 1];
            storage_forward[1] = 1.0;
            let (p_usd, usd_forward) = if n == 3 {
                let p_i = self.p_i(3);
                let r2 = if p_i > 0.0 { (self.p_i32 / p_i).min(1.0) } else { 0.0 };
                (p_i, vec![0.0, 1.0 - r2, r2, 0.0])
            } else if n >= 4 {
                let mut r = vec![0.0; n + 1];
                r[2] = 1.0;
                (self.p_i(n), r)
            } else {
                (0.0, vec![])
            };
            *action = PhotonAction {
                p_storage: self.p_s(n),
                p_usd,
                storage_forward,
                usd_forward,
            };
        }
        AttackPlan {
            p_u1: self.p_u1,
            d_tilde: self.d_tilde,
            per_photon,
        }
    }
}

/// What Eve does with `n`-photon pulses she does not block.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PhotonAction {
    pub p_storage: f64,
    pub p_usd: f64,
    /// `s(m|n)`: photons forwarded after storing the rest.
    pub storage_forward: Vec<f64>,
    /// `r(m|n)`: photons forwarded after a successful discrimination.
    pub usd_forward: Vec<f64>,
}

/// Unrestricted description of an attack, indexed by photon number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackPlan {
    pub p_u1: f64,
    pub d_tilde: f64,
    pub per_photon: Vec<PhotonAction>,
}

impl AttackPlan {
    /// Blocks every pulse.
    pub fn blocking(n_max: usize) -> Self {
        Self {
            p_u1: 0.0,
            d_tilde: 0.0,
            per_photon: vec![PhotonAction::default(); n_max + 1],
        }
    }

    /// `p_{B|E}(m)` for `m = 0..=max_forward`, excluding blocked pulses
    /// from `m = 0`.
    pub fn forward_distribution(&self, mu: f64, max_forward: usize) -> Vec<f64> {
        let mut out = vec![0.0; max_forward + 1];
        if max_forward >= 1 {
            out[1] += poisson(1, mu) * self.p_u1;
        }
        for (n, a) in self.per_photon.iter().enumerate().skip(2) {
            let pn = poisson(n, mu);
            for (m, s) in a.storage_forward.iter().enumerate().take(max_forward + 1) {
                out[m] += pn * a.p_storage * s;
            }
            for (m, r) in a.usd_forward.iter().enumerate().take(max_forward + 1) {
                out[m] += pn * a.p_usd * usd_success(n) * r;
            }
        }
        out
    }

    /// Eve's information on Alice's sifted bits, per pulse.
    pub fn info(&self, setup: &OpticalSetup, q: f64) -> Result<AttackInfoBreakdown> {
        let mu = setup.mu;
        let unitary = if self.p_u1 > 0.0 {
            poisson(1, mu)
                * self.p_u1
                * unitary_attack_info(self.d_tilde, q)?
                * p_acc(1, 1.0 - 2.0 * self.d_tilde, setup)
        } else {
            0.0
        };
        let mut storage = Vec::new();
        let mut usd = Vec::new();
        for (n, a) in self.per_photon.iter().enumerate().skip(2) {
            let pn = poisson(n, mu);
            let s: f64 = a
                .storage_forward
                .iter()
                .enumerate()
                .map(|(m, w)| w * storage_info(n - m, q) * p_acc(m, 1.0, setup))
                .sum();
            storage.push((n, pn * a.p_storage * s));
            let r: f64 = a
                .usd_forward
                .iter()
                .enumerate()
                .map(|(m, w)| w * p_acc(m, 1.0, setup))
                .sum();
            usd.push((n, pn * a.p_usd * usd_success(n) * usd_info(q) * r));
        }
        Ok(AttackInfoBreakdown::new(unitary, storage, usd))
    }
}

/// Eve's information split by attack channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackInfoBreakdown {
    pub i_total: f64,
    pub unitary: f64,
    /// `(n, contribution)` of storage attacks.
    pub storage: Vec<(usize, f64)>,
    /// `(n, contribution)` of discrimination attacks.
    pub usd: Vec<(usize, f64)>,
}

impl AttackInfoBreakdown {
    fn new(unitary: f64, storage: Vec<(usize, f64)>, usd: Vec<(usize, f64)>) -> Self {
        let i_total = unitary + storage.iter().map(|c| c.1).sum::<f64>() + usd.iter().map(|c| c.1).sum::<f64>();
        Self {
            i_total,
            unitary,
            storage,
            usd,
        }
    }

    pub fn storage_at(&self, n: usize) -> f64 {
        self.storage.iter().find(|c| c.0 == n).map_or(0.0, |c| c.1)
    }

    pub fn usd_at(&self, n: usize) -> f64 {
        self.usd.iter().find(|c| c.0 == n).map_or(0.0, |c| c.1)
    }
}

/// How the one- and two-photon forwarding targets are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ForwardModel {
    /// `mu t - (mu t)^2` and `(mu t)^2 / 2`, exact to second order.
    #[default]
    LeadingOrder,
    /// Exact solution of the no-click and conclusive-click conditions
    /// with forwarding restricted to one or two photons.
    Exact,
}

/// Forwarded photon-number distribution required of Eve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForwardDistribution {
    pub p_fwd: [f64; 3],
}

/// Linear constraints on a restricted strategy at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    setup: OpticalSetup,
    n_max: usize,
    photon: Vec<f64>,
    target_one: f64,
    target_two: f64,
    /// Right-hand side of the visibility condition.
    u_budget: f64,
}

impl ConstraintSystem {
    pub fn new(setup: &OpticalSetup, n_max: usize, model: ForwardModel) -> Result<Self> {
        if !(3..=30).contains(&n_max) {
            return Err(QkdError::Domain {
                name: "n_max",
                value: n_max as f64,
                domain: "{3, ..., 30}",
            });
        }
        let mt = setup.mean_received();
        let eta = setup.eta;
        let (target_one, target_two) = match model {
            ForwardModel::LeadingOrder => (mt - mt * mt, 0.5 * mt * mt),
            ForwardModel::Exact => {
                // with u = exp(-mu t eta / 2): sum = (1-u)(3-u)/eta and
                // two-photon mass = 2 (1-u)^2 / eta^2
                let one_minus_u = -(-0.5 * mt * eta).exp_m1();
                let u = 1.0 - one_minus_u;
                let two = 2.0 * one_minus_u * one_minus_u / (eta * eta);
                let sum = one_minus_u * (3.0 - u) / eta;
                (sum - 2.0 * two, two)
            }
        };
        let x = mt * eta;
        let u_budget = (-setup.fidelity() * x).exp() - (-x).exp();
        Ok(Self {
            setup: *setup,
            n_max,
            photon: (0..=n_max).map(|n| poisson(n, setup.mu)).collect(),
            target_one,
            target_two,
            u_budget: u_budget.max(0.0),
        })
    }

    pub fn setup(&self) -> &OpticalSetup {
        &self.setup
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn targets(&self) -> ForwardDistribution {
        ForwardDistribution {
            p_fwd: [0.0, self.target_one, self.target_two],
        }
    }

    /// Poisson mass beyond `n_max` that the constraints ignore.
    pub fn ignored_tail(&self) -> f64 {
        (1.0 - self.photon.iter().sum::<f64>()).max(0.0)
    }

    /// Whether the unitary attack must be used (visibility below one).
    pub fn needs_unitary(&self) -> bool {
        self.u_budget > 0.0
    }

    /// `p_u1` that meets the visibility condition at disturbance `D~`.
    pub fn unitary_probability(&self, d_tilde: f64) -> f64 {
        if !self.needs_unitary() {
            return 0.0;
        }
        self.u_budget / (self.photon[1] * self.setup.eta * d_tilde)
    }

    pub fn forward_distribution(&self, s: &PnsStrategy) -> ForwardDistribution {
        let f = s.to_plan().forward_distribution(self.setup.mu, 2);
        ForwardDistribution {
            p_fwd: [f[0], f[1], f[2]],
        }
    }

    /// Residuals of the one-photon, two-photon and visibility conditions.
    pub fn residuals(&self, s: &PnsStrategy) -> [f64; 3] {
        let f = self.forward_distribution(s);
        [
            f.p_fwd[1] - self.target_one,
            f.p_fwd[2] - self.target_two,
            self.photon[1] * s.p_u1 * self.setup.eta * s.d_tilde - self.u_budget,
        ]
    }

    fn p(&self, n: usize) -> f64 {
        self.photon[n]
    }

    /// Equalities, the `p_s(3) + p_i32 <= 1` row and unit bounds.
    fn linear_program(&self, objective: Vec<f64>, fixed_u: Option<f64>) -> LinearProgram {
        let nv = self.n_max + 1;
        let (p1, p2, p3) = (self.p(1), self.p(2), self.p(3));
        let ok3 = usd_success(3);
        let mut one = vec![0.0; nv];
        one[0] = p1;
        one[1] = p2;
        one[2] = p3 * (1.0 - ok3);
        one[3] = -p3 * ok3;
        let mut two = vec![0.0; nv];
        two[3] = p3 * ok3;
        let mut rhs_one = self.target_one - p3 * ok3;
        let mut rhs_two = self.target_two;
        for n in 4..=self.n_max {
            one[n] = self.p(n);
            two[n] = -self.p(n) * usd_success(n);
            rhs_two -= self.p(n) * usd_success(n);
        }
        let mut upper = vec![1.0; nv];
        if let Some(u) = fixed_u {
            rhs_one -= p1 * u;
            upper[0] = 0.0;
        } else if self.needs_unitary() {
            upper[0] = 0.0;
        }
        let mut joint = vec![0.0; nv];
        joint[2] = 1.0;
        joint[3] = 1.0;
        LinearProgram {
            objective,
            equalities: vec![Row::new(one, rhs_one), Row::new(two, rhs_two)],
            inequalities: vec![Row::new(joint, 1.0)],
            upper,
        }
    }
}

/// Objective of the linear program at fixed `q`: `info = c.x + constant
/// + unitary term`.
#[derive(Debug, Clone, PartialEq)]
struct InfoObjective {
    coefficients: Vec<f64>,
    constant: f64,
    unitary_scale: f64,
}

fn info_objective(system: &ConstraintSystem, q: f64) -> InfoObjective {
    let setup = &system.setup;
    let nv = system.n_max + 1;
    let xi1 = p_acc(1, 1.0, setup);
    let xi2 = p_acc(2, 1.0, setup);
    let i_usd = usd_info(q);
    let (p2, p3) = (system.p(2), system.p(3));
    let ok3 = usd_success(3);
    let mut c = vec![0.0; nv];
    c[1] = p2 * storage_info(1, q) * xi1;
    c[2] = p3 * (storage_info(2, q) * xi1 - ok3 * i_usd * xi1);
    c[3] = p3 * ok3 * i_usd * (xi2 - xi1);
    let mut constant = p3 * ok3 * i_usd * xi1;
    for n in 4..=system.n_max {
        let pn = system.p(n);
        c[n] = pn * (storage_info(n - 1, q) * xi1 - usd_success(n) * i_usd * xi2);
        constant += pn * usd_success(n) * i_usd * xi2;
    }
    InfoObjective {
        coefficients: c,
        constant,
        unitary_scale: system.p(1),
    }
}

/// Flip-independent statistics of the unitary attack at one disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitaryProfile {
    pub d_tilde: f64,
    /// Probability of the uninformative outcome.
    pub p_null: f64,
    /// Probability of guessing Alice's bit on an informative outcome.
    pub p_guess: f64,
}

impl UnitaryProfile {
    pub fn new(d_tilde: f64) -> Result<Self> {
        let h = helstrom_info(&build_attack(d_tilde)?, Target::Alice, 0.0)?;
        Ok(Self {
            d_tilde,
            p_null: h.outcome_probs[0],
            p_guess: h.posteriors[1],
        })
    }

    /// `I_U(D~, q) = (1 - p_null) (1 - h(p_guess'))`.
    pub fn info(&self, q: f64) -> f64 {
        let g = (1.0 - q) * self.p_guess + q * (1.0 - self.p_guess);
        (1.0 - self.p_null) * (1.0 - h2(g))
    }

    /// `I_U p_acc(1, 1 - 2 D~)` per unit of `p(1) p_u1`.
    fn yield_per_pulse(&self, setup: &OpticalSetup, q: f64) -> f64 {
        self.info(q) * p_acc(1, 1.0 - 2.0 * self.d_tilde, setup)
    }
}

/// [`UnitaryProfile`]s on the scan grid of [`EveOptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTable {
    profiles: Vec<UnitaryProfile>,
}

impl UnitaryTable {
    pub fn new(opts: &EveOptions) -> Result<Self> {
        let grid = linspace(opts.d_tilde_min, 0.5, opts.d_tilde_points.max(2));
        let profiles = opts
            .execution
            .map(&grid, |&d| UnitaryProfile::new(d))
            .into_iter()
            .collect::<Result<_>>()?;
        Ok(Self { profiles })
    }

    pub fn profiles(&self) -> &[UnitaryProfile] {
        &self.profiles
    }
}

fn unitary_yield(setup: &OpticalSetup, d_tilde: f64, q: f64) -> f64 {
    UnitaryProfile::new(d_tilde).map_or(f64::NAN, |p| p.yield_per_pulse(setup, q))
}

/// Search resolution for [`maximize_eve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EveOptions {
    pub n_max: usize,
    pub forward_model: ForwardModel,
    pub d_tilde_points: usize,
    pub d_tilde_min: f64,
    pub d_tilde_tol: f64,
    pub execution: Execution,
}

impl Default for EveOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            forward_model: ForwardModel::LeadingOrder,
            d_tilde_points: 500,
            d_tilde_min: 0.001,
            d_tilde_tol: 1e-6,
            execution: Execution::Sequential,
        }
    }
}

/// Eve's best restricted strategy and its information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EveOptimum {
    pub strategy: PnsStrategy,
    pub info: f64,
}

/// Linear-program optimum with `p_u1` fixed to `u` (or free when `None`).
fn solve_lp(system: &ConstraintSystem, objective: &InfoObjective, fixed_u: Option<f64>) -> Option<(Vec<f64>, f64)> {
    let lp = system.linear_program(objective.coefficients.clone(), fixed_u);
    let sol = lp.solve().ok()?;
    Some((sol.x, sol.objective + objective.constant))
}

/// Best value at a fixed `D~`, `None` if infeasible.
fn solve_at(system: &ConstraintSystem, objective: &InfoObjective, profile: Option<&UnitaryProfile>, q: f64) -> Option<EveOptimum> {
    let Some(profile) = profile else {
        let (x, info) = solve_lp(system, objective, None)?;
        return Some(EveOptimum {
            strategy: PnsStrategy::from_lp_vector(&x, 0.0),
            info,
        });
    };
    let u = system.unitary_probability(profile.d_tilde);
    if !(u <= 1.0) {
        return None;
    }
    let (mut x, info) = solve_lp(system, objective, Some(u))?;
    x[0] = u;
    Some(EveOptimum {
        strategy: PnsStrategy::from_lp_vector(&x, profile.d_tilde),
        info: info + objective.unitary_scale * u * profile.yield_per_pulse(&system.setup, q),
    })
}

/// Fills `values[lo..=hi]` given both ends. The optimum of the linear
/// program is concave in the right-hand side that `p_u1` shifts, so three
/// collinear samples imply exact linearity in between.
fn fill_concave(values: &mut [f64], shifts: &[f64], lo: usize, hi: usize, eval: &impl Fn(usize) -> f64) {
    if hi <= lo + 1 {
        return;
    }
    let mid = (lo + hi) / 2;
    values[mid] = eval(mid);
    let (a, b, m) = (values[lo], values[hi], values[mid]);
    if a.is_finite() && b.is_finite() && m.is_finite() {
        let w = (shifts[mid] - shifts[lo]) / (shifts[hi] - shifts[lo]);
        let chord = a + w * (b - a);
        let scale = a.abs().max(b.abs()).max(1e-300);
        if (m - chord).abs() <= 1e-11 * scale {
            for i in (lo + 1)..hi {
                let w = (shifts[i] - shifts[lo]) / (shifts[hi] - shifts[lo]);
                values[i] = a + w * (b - a);
            }
            return;
        }
    }
    fill_concave(values, shifts, lo, mid, eval);
    fill_concave(values, shifts, mid, hi, eval);
}

/// Maximizes Eve's information over restricted strategies at fixed `q`.
pub fn maximize_eve(system: &ConstraintSystem, q: f64, opts: &EveOptions) -> Result<EveOptimum> {
    if !system.needs_unitary() {
        return maximize_eve_with(system, q, opts, None);
    }
    let table = UnitaryTable::new(opts)?;
    maximize_eve_with(system, q, opts, Some(&table))
}

/// [`maximize_eve`] reusing a precomputed [`UnitaryTable`] (required
/// when the visibility is below one).
pub fn maximize_eve_with(
    system: &ConstraintSystem,
    q: f64,
    opts: &EveOptions,
    table: Option<&UnitaryTable>,
) -> Result<EveOptimum> {
    let objective = info_objective(system, q);
    let infeasible = || {
        QkdError::Infeasible(format!(
            "no strategy reproduces Bob's statistics at d = {} km, mu = {}",
            system.setup.distance, system.setup.mu
        ))
    };
    if !system.needs_unitary() {
        return solve_at(system, &objective, None, q).ok_or_else(infeasible);
    }
    let owned;
    let table = match table {
        Some(t) => t,
        None => {
            owned = UnitaryTable::new(opts)?;
            &owned
        }
    };
    let profiles = table.profiles();
    let grid: Vec<f64> = profiles.iter().map(|p| p.d_tilde).collect();
    let u: Vec<f64> = grid.iter().map(|&d| system.unitary_probability(d)).collect();
    // p_u1 decreases with D~, so the admissible points form a suffix
    let first = u.iter().position(|&v| v <= 1.0).ok_or_else(infeasible)?;
    let lp_value = |i: usize| solve_lp(system, &objective, Some(u[i])).map_or(f64::NEG_INFINITY, |s| s.1);
    let mut lp_values = vec![f64::NEG_INFINITY; grid.len()];
    let last = grid.len() - 1;
    lp_values[first] = lp_value(first);
    lp_values[last] = lp_value(last);
    fill_concave(&mut lp_values, &u, first, last, &lp_value);
    let scanned: Vec<f64> = (0..grid.len())
        .map(|i| {
            if i < first || !lp_values[i].is_finite() {
                f64::NEG_INFINITY
            } else {
                lp_values[i] + objective.unitary_scale * u[i] * profiles[i].yield_per_pulse(&system.setup, q)
            }
        })
        .collect();
    let at = |d: f64| -> Option<EveOptimum> {
        let d = d.clamp(opts.d_tilde_min, 0.5);
        let profile = UnitaryProfile::new(d).ok()?;
        solve_at(system, &objective, Some(&profile), q)
    };
    let best = refine_scan(|d| at(d).map_or(f64::NEG_INFINITY, |s| s.info), &grid, &scanned, opts.d_tilde_tol);
    if !best.value.is_finite() {
        return Err(infeasible());
    }
    match grid.iter().position(|&d| d == best.arg) {
        Some(i) => solve_at(system, &objective, Some(&profiles[i]), q),
        None => at(best.arg),
    }
    .ok_or_else(infeasible)
}

/// Eve's information for a given restricted strategy.
pub fn eve_info(setup: &OpticalSetup, strategy: &PnsStrategy, q: f64) -> Result<AttackInfoBreakdown> {
    strategy.validate()?;
    strategy.to_plan().info(setup, q)
}

/// Closed-form structure of the optimal attack when one-photon
/// forwarding dominates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticOracle {
    /// `(D~, K(D~))` on the scan grid.
    pub k_curve: Vec<(f64, f64)>,
    /// `(n, L(n))` for `n = 3..=n_max`.
    pub l_values: Vec<(usize, f64)>,
    pub d_tilde_star: f64,
}

/// `K(D~) = [(xi~/xi) I_U(D~) - I_S(1)] / D~` at `q = 0`.
pub fn unitary_gain(setup: &OpticalSetup, d_tilde: f64) -> f64 {
    let xi = p_acc(1, 1.0, setup);
    (unitary_yield(setup, d_tilde, 0.0) / xi - storage_info(1, 0.0)) / d_tilde
}

/// `L(n) = I_S(n-1) - I_S(1) - p_ok(n) (1 - I_S(1))` at `q = 0`.
pub fn storage_advantage(n: usize) -> f64 {
    let s1 = storage_info(1, 0.0);
    storage_info(n - 1, 0.0) - s1 - usd_success(n) * (1.0 - s1)
}

pub fn analytic_oracle(setup: &OpticalSetup, n_max: usize) -> AnalyticOracle {
    let grid = linspace(0.001, 0.5, 500);
    let k_curve: Vec<(f64, f64)> = grid.iter().map(|&d| (d, unitary_gain(setup, d))).collect();
    let best = scan_then_refine(|d| unitary_gain(setup, d.clamp(0.001, 0.5)), &grid, 1e-9);
    AnalyticOracle {
        k_curve,
        l_values: (3..=n_max).map(|n| (n, storage_advantage(n))).collect(),
        d_tilde_star: best.arg,
    }
}
