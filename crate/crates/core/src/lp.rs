//! Small dense linear programs: `max c.x` subject to equalities,
//! `<=` rows and `0 <= x <= upper`.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-12;
const PHASE_ONE_TOL: f64 = 1e-9;
const VERTEX_FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("no feasible point")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// One linear row `coefficients . x (= or <=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self { coefficients, rhs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub equalities: Vec<Row>,
    pub inequalities: Vec<Row>,
    /// Per-variable upper bounds; `f64::INFINITY` for none.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Checks all constraints with absolute slack `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.upper).all(|(v, u)| *v >= -tol && *v <= u + tol)
            && self.equalities.iter().all(|r| (r.eval(x) - r.rhs).abs() <= tol)
            && self.inequalities.iter().all(|r| r.eval(x) <= r.rhs + tol)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.upper.len() != n {
            return Err(LpError::Malformed("bound vector length".into()));
        }
        for r in self.equalities.iter().chain(&self.inequalities) {
            if r.coefficients.len() != n {
                return Err(LpError::Malformed("row length".into()));
            }
            if !r.rhs.is_finite() || r.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed("non-finite coefficient".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite objective".into()));
        }
        Ok(())
    }

    /// Two-phase tableau simplex with Bland's rule.
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.validate()?;
        Tableau::build(self).solve(self)
    }

    /// Exhaustive search over basic solutions. Exponential in size; meant
    /// as an independent check of [`LinearProgram::solve`].
    pub fn solve_by_vertex_enumeration(&self) -> Result<LpSolution, LpError> {
        self.validate()?;
        let n = self.num_vars();
        let m_eq = self.equalities.len();
        if m_eq > n {
            return Err(LpError::Malformed("more equalities than variables".into()));
        }
        // candidate active rows: explicit <= rows, then lower and upper bounds
        let mut candidates: Vec<(Vec<f64>, f64, Option<usize>)> = self
            .inequalities
            .iter()
            .map(|r| (r.coefficients.clone(), r.rhs, None))
            .collect();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            candidates.push((e.clone(), 0.0, Some(i)));
            if self.upper[i].is_finite() {
                candidates.push((e, self.upper[i], Some(i)));
            }
        }
        let k = n - m_eq;
        let mut best: Option<LpSolution> = None;
        let mut chosen = Vec::with_capacity(k);
        enumerate_subsets(candidates.len(), k, 0, &mut chosen, &mut |subset| {
            let mut used = vec![false; n];
            for &c in subset.iter() {
                if let Some(v) = candidates[c].2 {
                    if used[v] {
                        return;
                    }
                    used[v] = true;
                }
            }
            let mut a: Vec<Vec<f64>> = self.equalities.iter().map(|r| r.coefficients.clone()).collect();
            let mut b: Vec<f64> = self.equalities.iter().map(|r| r.rhs).collect();
            for &c in subset.iter() {
                a.push(candidates[c].0.clone());
                b.push(candidates[c].1);
            }
            if let Some(x) = solve_square(a, b) {
                if self.is_feasible(&x, VERTEX_FEAS_TOL) {
                    let value = self.value(&x);
                    if best.as_ref().is_none_or(|s| value > s.objective) {
                        best = Some(LpSolution { x, objective: value });
                    }
                }
            }
        });
        match best {
            Some(s) => Ok(s),
            None => Err(LpError::Infeasible),
        }
    }
}

fn enumerate_subsets(
    n: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let remaining = k - chosen.len();
    for i in start..=(n.saturating_sub(remaining)) {
        if i >= n {
            break;
        }
        chosen.push(i);
        enumerate_subsets(n, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let scale = a[piv].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if a[piv][col].abs() <= 1e-12 * scale.max(1e-300) || a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_struct: usize,
    first_artificial: usize,
    n_cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        // (coefficients, rhs, has_slack)
        let mut raw: Vec<(Vec<f64>, f64, bool)> = Vec::new();
        for r in &lp.equalities {
            raw.push((r.coefficients.clone(), r.rhs, false));
        }
        for r in &lp.inequalities {
            raw.push((r.coefficients.clone(), r.rhs, true));
        }
        for (i, &u) in lp.upper.iter().enumerate() {
            if u.is_finite() {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                raw.push((e, u, true));
            }
        }
        let n_slack = raw.iter().filter(|r| r.2).count();
        let mut slack_sign = Vec::with_capacity(raw.len());
        let mut needs_artificial = Vec::with_capacity(raw.len());
        for r in raw.iter_mut() {
            let scale = r.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            r.0.iter_mut().for_each(|v| *v /= scale);
            r.1 /= scale;
            let mut sign = 1.0;
            if r.1 < 0.0 {
                r.0.iter_mut().for_each(|v| *v = -*v);
                r.1 = -r.1;
                sign = -1.0;
            }
            slack_sign.push(if r.2 { sign } else { 0.0 });
            needs_artificial.push(!r.2 || sign < 0.0);
        }
        let n_art = needs_artificial.iter().filter(|&&a| a).count();
        let first_artificial = n + n_slack;
        let n_cols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(raw.len());
        let mut basis = Vec::with_capacity(raw.len());
        let (mut slack_col, mut art_col) = (n, first_artificial);
        for (i, r) in raw.iter().enumerate() {
            let mut row = vec![0.0; n_cols + 1];
            row[..n].copy_from_slice(&r.0);
            row[n_cols] = r.1;
            let mut basic = None;
            if r.2 {
                row[slack_col] = slack_sign[i];
                if slack_sign[i] > 0.0 {
                    basic = Some(slack_col);
                }
                slack_col += 1;
            }
            if needs_artificial[i] {
                row[art_col] = 1.0;
                basic = Some(art_col);
                art_col += 1;
            }
            basis.push(basic.expect("every row has a basic column"));
            rows.push(row);
        }
        Self {
            rows,
            basis,
            n_struct: n,
            first_artificial,
            n_cols,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[c] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost . columns`; columns at or beyond `col_limit` never enter.
    fn optimize(&mut self, cost: &[f64], col_limit: usize) -> Result<(), LpError> {
        let max_iter = 50 * (self.n_cols + self.rows.len()) + 100;
        for _ in 0..max_iter {
            let mut entering = None;
            for j in 0..col_limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                if reduced > COST_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let rhs = self.n_cols;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_EPS {
                    let ratio = row[rhs] / row[j];
                    let better = match leave {
                        None => true,
                        Some((k, best)) => {
                            ratio < best - 1e-15 || (ratio <= best + 1e-15 && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, j);
        }
        Err(LpError::Malformed("simplex iteration limit".into()))
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let rhs = self.n_cols;
        if self.first_artificial < self.n_cols {
            let mut cost = vec![0.0; self.n_cols];
            cost[self.first_artificial..].iter_mut().for_each(|c| *c = -1.0);
            self.optimize(&cost, self.n_cols)?;
            let infeasibility: f64 = self
                .rows
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.first_artificial)
                .map(|(row, _)| row[rhs])
                .sum();
            if infeasibility > PHASE_ONE_TOL {
                return Err(LpError::Infeasible);
            }
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    let col = (0..self.first_artificial)
                        .filter(|j| !self.basis.contains(j))
                        .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
                    if let Some(c) = col {
                        if self.rows[r][c].abs() > PIVOT_EPS {
                            self.pivot(r, c);
                        }
                    }
                }
            }
        }
        let c_scale = lp.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let c_scale = if c_scale > 0.0 { c_scale } else { 1.0 };
        let mut cost = vec![0.0; self.n_cols];
        for (j, c) in lp.objective.iter().enumerate() {
            cost[j] = c / c_scale;
        }
        self.optimize(&cost, self.first_artificial)?;
        let mut x = vec![0.0; self.n_struct];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_struct {
                x[b] = row[rhs].max(0.0).min(lp.upper[b]);
            }
        }
        Ok(LpSolution {
            objective: lp.value(&x),
            x,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn textbook() -> LinearProgram {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        LinearProgram {
            objective: vec![3.0, 2.0],
            equalities: vec![],
            inequalities: vec![Row::new(vec![1.0, 1.0], 4.0), Row::new(vec![1.0, 3.0], 6.0)],
            upper: vec![3.0, f64::INFINITY],
        }
    }

    #[test]
    fn simplex_solves_textbook_program() {
        let s = textbook().solve().unwrap();
        assert_abs_diff_eq!(s.objective, 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-12);
        let v = textbook().solve_by_vertex_enumeration().unwrap();
        assert_abs_diff_eq!(v.objective, 11.0, epsilon = 1e-12);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // max x - y, x + y = 1, -x <= -0.25, y <= 1, x <= 0.6
        let lp = LinearProgram {
            objective: vec![1.0, -1.0],
            equalities: vec![Row::new(vec![1.0, 1.0], 1.0)],
            inequalities: vec![Row::new(vec![-1.0, 0.0], -0.25)],
            upper: vec![0.6, 1.0],
        };
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 0.2, epsilon = 1e-12);
        assert!(lp.is_feasible(&s.x, 1e-12));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![1.0],
            equalities: vec![Row::new(vec![1.0], 2.0)],
            inequalities: vec![],
            upper: vec![1.0],
        };
        assert_eq!(lp.solve(), Err(LpError::Infeasible));
        assert_eq!(lp.solve_by_vertex_enumeration(), Err(LpError::Infeasible));
        let lp = LinearProgram {
            objective: vec![1.0],
            equalities: vec![],
            inequalities: vec![],
            upper: vec![f64::INFINITY],
        };
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn rejects_malformed_rows() {
        let mut lp = textbook();
        lp.inequalities.push(Row::new(vec![1.0], 1.0));
        assert!(matches!(lp.solve(), Err(LpError::Malformed(_))));
    }
}
