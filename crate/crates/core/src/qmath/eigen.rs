use crate::error::{QkdError, Result};

const JACOBI_THRESHOLD: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows<const N: usize>(rows: &[[f64; N]]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i * N + j] = v;
            }
        }
        m.symmetrize();
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Sum of outer products `|v><v|`.
    pub fn from_outer_products(vectors: &[&[f64]]) -> Self {
        let n = vectors.first().map_or(0, |v| v.len());
        let mut m = Self::zeros(n);
        for v in vectors {
            for i in 0..n {
                for j in 0..n {
                    m.data[i * n + j] += v[i] * v[j];
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `<v|M|v>`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.data[i * self.n + j] * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    fn off_diagonal_norm(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.data[i * n + j].powi(2);
                }
            }
        }
        acc.sqrt()
    }
}

/// Spectrum with orthonormal eigenvectors; `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Closed-form eigenvalues of `[[a, b], [b, c]]`, descending.
pub fn eigen_2x2(a: f64, b: f64, c: f64) -> [f64; 2] {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    [mean + radius, mean - radius]
}

/// Cyclic Jacobi diagonalization; eigenvalues are returned descending.
pub fn jacobi_eigen(m: &SymmetricMatrix) -> Result<Eigen> {
    let n = m.n;
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(QkdError::InvalidState("matrix has non-finite entries".into()));
    }
    let mut a = m.clone();
    let mut v = SymmetricMatrix::zeros(n);
    for i in 0..n {
        v.data[i * n + i] = 1.0;
    }
    let scale = m.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= JACOBI_THRESHOLD * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a.data[p * n + p];
                let aqq = a.data[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && a.off_diagonal_norm() > JACOBI_THRESHOLD * scale {
        return Err(QkdError::InvalidState(
            "Jacobi iteration did not converge".into(),
        ));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (a.data[k * n + k], (0..n).map(|i| v.data[i * n + k]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_matches_jacobi() {
        let (a, b, c) = (0.7, -0.2, 0.1);
        let cf = eigen_2x2(a, b, c);
        let j = jacobi_eigen(&SymmetricMatrix::from_rows(&[[a, b], [b, c]])).unwrap();
        assert_abs_diff_eq!(cf[0], j.values[0], epsilon = 1e-14);
        assert_abs_diff_eq!(cf[1], j.values[1], epsilon = 1e-14);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = SymmetricMatrix::from_rows(&[
            [2.0, 0.3, -0.1, 0.05],
            [0.3, 1.0, 0.2, 0.0],
            [-0.1, 0.2, 0.5, 0.4],
            [0.05, 0.0, 0.4, -0.3],
        ]);
        let e = jacobi_eigen(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = (0..4)
                    .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j])
                    .sum();
                assert_abs_diff_eq!(r, m.get(i, j), epsilon = 1e-13);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        assert_abs_diff_eq!(e.values.iter().sum::<f64>(), m.trace(), epsilon = 1e-13);
    }

    #[test]
    fn pauli_x_and_identity() {
        assert_eq!(eigen_2x2(0.0, 1.0, 0.0), [1.0, -1.0]);
        let e = jacobi_eigen(&SymmetricMatrix::diagonal(&[1.0; 3])).unwrap();
        assert_eq!(e.values, vec![1.0; 3]);
    }

    #[test]
    fn diagonal_matrix_is_fixed_point() {
        let e = jacobi_eigen(&SymmetricMatrix::diagonal(&[0.3, 0.1, 0.6])).unwrap();
        assert_eq!(e.values, vec![0.6, 0.3, 0.1]);
    }
}
