use crate::error::{check_dim, Error, Result};

/// Lower-triangular factor `L` of a positive definite matrix `M = L Lᵀ`.
///
/// Stored packed by rows. The diagonal is strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct CholFactor {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl CholFactor {
    pub fn identity(dim: usize) -> Self {
        let mut packed = vec![0.0; dim * (dim + 1) / 2];
        for i in 0..dim {
            packed[idx(i, i)] = 1.0;
        }
        Self { dim, packed }
    }

    /// Factor of `diag(variances)`.
    pub fn from_diagonal(variances: &[f64]) -> Result<Self> {
        let dim = variances.len();
        let mut packed = vec![0.0; dim * (dim + 1) / 2];
        for (i, &v) in variances.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive { index: i, value: v });
            }
            packed[idx(i, i)] = v.sqrt();
        }
        Ok(Self { dim, packed })
    }

    /// Cholesky decomposition of a symmetric positive definite matrix given
    /// row-major as `dim * dim` entries. Only the lower triangle is read.
    pub fn from_covariance(matrix: &[f64], dim: usize) -> Result<Self> {
        check_dim(dim * dim, matrix.len())?;
        let mut packed = vec![0.0; dim * (dim + 1) / 2];
        for i in 0..dim {
            for j in 0..=i {
                let mut sum = matrix[i * dim + j];
                for k in 0..j {
                    sum -= packed[idx(i, k)] * packed[idx(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "covariance",
                            reason: format!("not positive definite at pivot {i}"),
                        });
                    }
                    packed[idx(i, i)] = sum.sqrt();
                } else {
                    packed[idx(i, j)] = sum / packed[idx(j, j)];
                }
            }
        }
        Ok(Self { dim, packed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.packed[idx(i, j)]
        }
    }

    /// `L v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.packed[idx(i, 0)..=idx(i, i)];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `Lᵀ v`.
    pub fn mul_transpose_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.packed[idx(i, 0)..=idx(i, i)];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * v[i];
            }
        }
        out
    }

    /// `M v`.
    pub fn mul_matrix_vec(&self, v: &[f64]) -> Vec<f64> {
        self.mul_vec(&self.mul_transpose_vec(v))
    }

    /// Forward substitution: returns `L⁻¹ v`.
    pub fn solve_lower(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.packed[idx(i, 0)..=idx(i, i)];
            let mut sum = v[i];
            for k in 0..i {
                sum -= row[k] * out[k];
            }
            out[i] = sum / row[i];
        }
        out
    }

    /// Back substitution: returns `L⁻ᵀ v`.
    pub fn solve_upper(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in (0..d).rev() {
            let mut s = v[i];
            for k in i + 1..d {
                s -= self.packed[idx(k, i)] * out[k];
            }
            out[i] = s / self.packed[idx(i, i)];
        }
        out
    }

    /// `M⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(v))
    }

    /// `vᵀ M⁻¹ v`.
    pub fn quad_form_inv(&self, v: &[f64]) -> f64 {
        self.solve_lower(v).iter().map(|z| z * z).sum()
    }

    /// `log det M`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim)
            .map(|i| self.packed[idx(i, i)].ln())
            .sum::<f64>()
    }

    /// Reconstructs `M = L Lᵀ` row-major.
    pub fn matrix(&self) -> Vec<f64> {
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                m[i * d + j] = s;
                m[j * d + i] = s;
            }
        }
        m
    }
}
