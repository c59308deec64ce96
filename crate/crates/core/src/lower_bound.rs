//! One-way key-rate lower bound with bit-flip preprocessing for
//! Bell-diagonal single-photon states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, QkdError, Result};
use crate::exec::Execution;
use crate::optim::{bisect_sign_change, golden_max, linspace, nelder_mead_unit_square, refine_scan};
use crate::qmath::{eigen_2x2, h2, BellDiagonal};

/// Protocol whose sifted-state constraints define the worst-case search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    Sarg04,
    Sarg04TwoSet,
    Bb84,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Sarg04, Protocol::Sarg04TwoSet, Protocol::Bb84];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Sarg04 => "sarg04",
            Protocol::Sarg04TwoSet => "sarg04-2set",
            Protocol::Bb84 => "bb84",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown protocol '{s}' (expected sarg04, sarg04-2set or bb84)"))
    }
}

/// Set of Bell-diagonal states compatible with an observed QBER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibleStates {
    pub protocol: Protocol,
    pub qber: f64,
}

impl CompatibleStates {
    pub fn new(protocol: Protocol, qber: f64) -> Result<Self> {
        check_range("qber", qber, 0.0, 0.5, "[0, 0.5]")?;
        Ok(Self { protocol, qber })
    }

    /// Admissible range of the scalar free parameter (four-set: `lambda2`,
    /// BB84: `lambda4`). `None` for the two-set family.
    pub fn free_param_range(&self) -> Option<(f64, f64)> {
        let q = self.qber;
        match self.protocol {
            Protocol::Sarg04 => Some((0.5 * q, q)),
            Protocol::Bb84 => Some((0.0, q)),
            Protocol::Sarg04TwoSet => None,
        }
    }

    /// Weights for a scalar parameter in [`Self::free_param_range`].
    fn weights_1d(&self, x: f64) -> [f64; 4] {
        let q = self.qber;
        match self.protocol {
            Protocol::Sarg04 => [1.0 - q - x, x, x - 0.5 * q, 1.5 * q - x],
            Protocol::Bb84 => [1.0 - 2.0 * q + x, q - x, q - x, x],
            Protocol::Sarg04TwoSet => unreachable!("two-set family is two-dimensional"),
        }
    }

    /// Two-set weights for a point of the unit square mapped onto the
    /// polytope `lambda2 in [0, min(2Q, 1-Q)]`,
    /// `lambda4 in [lambda2/2, min(2 lambda2, Q)]`.
    fn weights_2d(&self, uv: [f64; 2]) -> [f64; 4] {
        let q = self.qber;
        let l2 = uv[0] * (2.0 * q).min(1.0 - q);
        let lo = 0.5 * l2;
        let hi = (2.0 * l2).min(q);
        let l4 = lo + uv[1] * (hi - lo).max(0.0);
        [1.0 - q - l2, l2, q - l4, l4]
    }

    /// Whether a state belongs to the set, with slack `tol`.
    pub fn contains(&self, state: &BellDiagonal, tol: f64) -> bool {
        let [l1, l2, l3, l4] = state.weights();
        let q = self.qber;
        if (l1 + l2 - (1.0 - q)).abs() > tol || (l3 + l4 - q).abs() > tol {
            return false;
        }
        match self.protocol {
            Protocol::Sarg04 => {
                (l4 + 3.0 * l3 - 2.0 * l2).abs() <= tol && l2 >= 0.5 * q - tol && l2 <= q + tol
            }
            Protocol::Bb84 => (l2 - l3).abs() <= tol,
            Protocol::Sarg04TwoSet => l4 >= 0.5 * l2 - tol && l4 <= (2.0 * l2).min(q) + tol,
        }
    }
}

/// Bound value together with the optimizing flip probability and the
/// worst-case state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreprocessedRate {
    pub q: f64,
    pub r: f64,
    pub lambda_star: BellDiagonal,
}

/// Search resolution for the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundOptions {
    pub inner_scan_points: usize,
    pub inner_tol: f64,
    pub two_set_grid: usize,
    pub q_grid: Vec<f64>,
    pub q_tol: f64,
    pub threshold_tol: f64,
    pub execution: Execution,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self {
            inner_scan_points: 200,
            inner_tol: 1e-10,
            two_set_grid: 100,
            q_grid: (0..100).map(|i| 0.005 * i as f64).collect(),
            q_tol: 1e-7,
            threshold_tol: 1e-4,
            execution: Execution::Parallel,
        }
    }
}

fn block_entropy(a: f64, b: f64, coherence: f64) -> f64 {
    let off = coherence * (a * b).max(0.0).sqrt();
    let [e1, e2] = eigen_2x2(a, off, b);
    xlog(e1) + xlog(e2)
}

fn xlog(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn rate_weights(l: [f64; 4], q: f64) -> f64 {
    let qber = l[2] + l[3];
    let s_e: f64 = l.iter().map(|&p| xlog(p)).sum();
    // the two conditional Eve states share their spectrum up to the sign
    // of the coherences; both are evaluated
    let c = 1.0 - 2.0 * q;
    let s0 = block_entropy(l[0], l[1], c) + block_entropy(l[2], l[3], c);
    let s1 = block_entropy(l[0], l[1], -c) + block_entropy(l[2], l[3], -c);
    let flipped = (1.0 - q) * qber + q * (1.0 - qber);
    let s_b = h2(flipped);
    1.0 - s_e + 0.5 * (s0 + s1) - s_b
}

/// Key rate `1 - S(E) + [S(E|A'=0) + S(E|A'=1)]/2 - H(A'|B)` for a
/// Bell-diagonal state and flip probability `q`.
pub fn rate(state: &BellDiagonal, q: f64) -> Result<f64> {
    check_range("q", q, 0.0, 0.5, "[0, 0.5]")?;
    Ok(rate_weights(state.weights(), q))
}

/// Infimum of [`rate`] over the compatible set at fixed `q`.
pub fn worst_case(set: &CompatibleStates, q: f64, opts: &LowerBoundOptions) -> Result<(f64, BellDiagonal)> {
    check_range("q", q, 0.0, 0.5, "[0, 0.5]")?;
    let (value, weights) = match set.free_param_range() {
        Some((lo, hi)) => {
            let grid = linspace(lo, hi, opts.inner_scan_points.max(2));
            let values: Vec<f64> = grid
                .iter()
                .map(|&x| -rate_weights(set.weights_1d(x), q))
                .collect();
            let best = refine_scan(
                |x| -rate_weights(set.weights_1d(x.clamp(lo, hi)), q),
                &grid,
                &values,
                opts.inner_tol,
            );
            let x = best.arg.clamp(lo, hi);
            (-best.value, set.weights_1d(x))
        }
        None => {
            let n = opts.two_set_grid.max(2);
            let axis = linspace(0.0, 1.0, n);
            let mut best = (f64::INFINITY, [0.0, 0.0]);
            for &u in &axis {
                for &v in &axis {
                    let r = rate_weights(set.weights_2d([u, v]), q);
                    if r < best.0 {
                        best = (r, [u, v]);
                    }
                }
            }
            let (uv, r) = nelder_mead_unit_square(
                |p| rate_weights(set.weights_2d(p), q),
                best.1,
                1.0 / (n - 1) as f64,
                1e-14,
                400,
            );
            if r < best.0 {
                (r, set.weights_2d(uv))
            } else {
                (best.0, set.weights_2d(best.1))
            }
        }
    };
    let clean = weights.map(|w| w.max(0.0));
    Ok((value, BellDiagonal::from_unnormalized(clean)?))
}

/// `sup_q inf_states rate`; with `preprocessing` off only `q = 0` is used.
pub fn r1(protocol: Protocol, qber: f64, preprocessing: bool, opts: &LowerBoundOptions) -> Result<PreprocessedRate> {
    check_range("qber", qber, 0.0, 0.3, "[0, 0.3]")?;
    let set = CompatibleStates::new(protocol, qber)?;
    let at = |q: f64| -> Result<PreprocessedRate> {
        let (r, lambda_star) = worst_case(&set, q, opts)?;
        Ok(PreprocessedRate { q, r, lambda_star })
    };
    if !preprocessing {
        return at(0.0);
    }
    let grid: Vec<f64> = opts.q_grid.iter().copied().filter(|q| (0.0..0.5).contains(q)).collect();
    if grid.is_empty() {
        return Err(QkdError::Domain {
            name: "q grid",
            value: f64::NAN,
            domain: "non-empty subset of [0, 0.5)",
        });
    }
    let scanned = opts.execution.map(&grid, |&q| at(q));
    let scanned: Vec<PreprocessedRate> = scanned.into_iter().collect::<Result<_>>()?;
    let mut best_i = 0;
    for (i, s) in scanned.iter().enumerate() {
        if s.r > scanned[best_i].r {
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = if best_i + 1 < grid.len() {
        grid[best_i + 1]
    } else {
        0.5 - opts.q_tol
    };
    let refined = golden_max(
        |q| worst_case(&set, q, opts).map_or(f64::NEG_INFINITY, |w| w.0),
        lo,
        hi,
        opts.q_tol,
    );
    if refined.value > scanned[best_i].r {
        at(refined.arg)
    } else {
        Ok(scanned[best_i])
    }
}

/// QBER at which [`r1`] changes sign.
pub fn threshold(protocol: Protocol, preprocessing: bool, opts: &LowerBoundOptions) -> Result<f64> {
    // r1 only needs its sign here; the q scan is done sequentially inside
    let positive = |qber: f64| r1(protocol, qber, preprocessing, opts).is_ok_and(|r| r.r > 0.0);
    bisect_sign_change(positive, 0.05, 0.2, opts.threshold_tol)
        .ok_or_else(|| QkdError::Infeasible("lower bound does not change sign on [0.05, 0.2]".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_states() {
        let perfect = BellDiagonal::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(rate(&perfect, 0.0).unwrap(), 1.0, epsilon = 1e-14);
        let mixed = BellDiagonal::new([0.25; 4]).unwrap();
        assert_abs_diff_eq!(rate(&mixed, 0.0).unwrap(), -1.0, epsilon = 1e-14);
        assert!(rate(&perfect, 0.6).is_err());
    }

    #[test]
    fn zero_qber_gives_unit_rate() {
        let opts = LowerBoundOptions::default();
        for p in Protocol::ALL {
            let r = r1(p, 0.0, true, &opts).unwrap();
            assert_abs_diff_eq!(r.r, 1.0, epsilon = 1e-12);
            assert_eq!(r.q, 0.0);
        }
    }

    #[test]
    fn worst_case_state_is_admissible() {
        let opts = LowerBoundOptions::default();
        for p in Protocol::ALL {
            let set = CompatibleStates::new(p, 0.07).unwrap();
            let (v, s) = worst_case(&set, 0.1, &opts).unwrap();
            assert!(set.contains(&s, 1e-9), "{p}: {s:?}");
            assert_abs_diff_eq!(rate(&s, 0.1).unwrap(), v, epsilon = 1e-10);
        }
    }

    #[test]
    fn sign_examples() {
        let opts = LowerBoundOptions::default();
        assert!(r1(Protocol::Sarg04, 0.08, true, &opts).unwrap().r > 0.0);
        assert!(r1(Protocol::Bb84, 0.13, true, &opts).unwrap().r < 0.0);
        assert!(r1(Protocol::Sarg04, 0.31, true, &opts).is_err());
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert!("b92".parse::<Protocol>().is_err());
    }
}
