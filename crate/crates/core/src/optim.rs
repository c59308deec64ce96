//! One- and two-dimensional search routines used by the outer loops.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section maximization of `f` on `[lo, hi]`.
///
/// Only interior points are evaluated. Non-finite values compare as
/// `-inf`, so undefined regions are avoided rather than propagated.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    if fc >= fd {
        Maximum { arg: c, value: fc }
    } else {
        Maximum { arg: d, value: fd }
    }
}

/// Evaluates `f` on `grid`, then refines between the neighbours of the
/// best grid point. Ties keep the earliest grid point, and the refined
/// point only replaces it when strictly better.
pub fn scan_then_refine<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], tol: f64) -> Maximum {
    assert!(!grid.is_empty(), "empty scan grid");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    refine_scan(f, grid, &values, tol)
}

/// Refinement step of [`scan_then_refine`] for values computed elsewhere.
pub fn refine_scan<F: FnMut(f64) -> f64>(f: F, grid: &[f64], values: &[f64], tol: f64) -> Maximum {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    let scan_best = Maximum {
        arg: grid[best],
        value: values[best],
    };
    if !scan_best.value.is_finite() || grid.len() < 2 {
        return scan_best;
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let refined = golden_max(f, lo, hi, tol);
    if refined.value > scan_best.value {
        refined
    } else {
        scan_best
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` log-spaced points covering `[lo, hi]` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Finds the point where `positive` switches from true (at `lo`) to
/// false (at `hi`). Returns `None` when the endpoints do not bracket.
pub fn bisect_sign_change<F: FnMut(f64) -> bool>(
    mut positive: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<f64> {
    if !positive(lo) || positive(hi) {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Nelder-Mead minimization restricted to the unit square; trial points
/// are clamped to the box.
pub fn nelder_mead_unit_square<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let clamp = |p: [f64; 2]| [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)];
    let offset = |p: [f64; 2], k: usize| {
        let mut q = p;
        q[k] = if q[k] + step <= 1.0 { q[k] + step } else { q[k] - step };
        q
    };
    let mut simplex = [start, offset(start, 0), offset(start, 1)].map(clamp);
    let mut values = simplex.map(&mut f);
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if (values[2] - values[0]).abs() <= tol {
            break;
        }
        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            clamp([
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ])
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = clamp([
                        0.5 * (simplex[0][0] + simplex[k][0]),
                        0.5 * (simplex[0][1] + simplex[k][1]),
                    ]);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let mut best = 0;
    for k in 1..3 {
        if values[k] < values[best] {
            best = k;
        }
    }
    (simplex[best], values[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_max(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(m.arg, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn scan_prefers_first_of_ties() {
        let grid = linspace(0.0, 1.0, 11);
        let m = scan_then_refine(|_| 1.0, &grid, 1e-6);
        assert_eq!(m.arg, 0.0);
    }

    #[test]
    fn scan_survives_undefined_regions() {
        let grid = linspace(0.0, 1.0, 21);
        let m = scan_then_refine(
            |x| if x < 0.62 { f64::NEG_INFINITY } else { -x },
            &grid,
            1e-9,
        );
        assert_abs_diff_eq!(m.arg, 0.62, epsilon = 1e-6);
    }

    #[test]
    fn bisection_locates_threshold() {
        let t = bisect_sign_change(|x| x < 0.1234, 0.0, 1.0, 1e-9).unwrap();
        assert_abs_diff_eq!(t, 0.1234, epsilon = 1e-8);
        assert!(bisect_sign_change(|_| true, 0.0, 1.0, 1e-9).is_none());
    }

    #[test]
    fn nelder_mead_on_box() {
        let (p, v) = nelder_mead_unit_square(
            |p| (p[0] - 0.2).powi(2) + 3.0 * (p[1] - 0.7).powi(2),
            [0.5, 0.5],
            0.1,
            1e-16,
            1000,
        );
        assert_abs_diff_eq!(p[0], 0.2, epsilon = 1e-5);
        assert_abs_diff_eq!(p[1], 0.7, epsilon = 1e-5);
        assert!(v < 1e-10);
        // minimum outside the box lands on the boundary
        let (p, _) = nelder_mead_unit_square(|p| (p[0] + 1.0).powi(2) + p[1], [0.5, 0.5], 0.1, 1e-14, 1000);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = logspace(0.01, 1.0, 3);
        assert_abs_diff_eq!(g[1], 0.1, epsilon = 1e-15);
    }
}
