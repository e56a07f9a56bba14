use super::{Support, TargetModel};
use crate::error::{check_dim, Result};
use crate::prims::CholFactor;

/// `N(mean, L Lᵀ)`, unnormalised.
#[derive(Clone, Debug)]
pub struct Gaussian {
    mean: Vec<f64>,
    chol: CholFactor,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, chol: CholFactor) -> Result<Self> {
        check_dim(chol.dim(), mean.len())?;
        Ok(Self { mean, chol })
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            chol: CholFactor::identity(dim),
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn chol(&self) -> &CholFactor {
        &self.chol
    }

    fn diff(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).map(|(a, b)| a - b).collect()
    }
}

impl TargetModel for Gaussian {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn support(&self) -> Support {
        Support::AllReals
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if !Support::AllReals.contains(x) {
            return f64::NEG_INFINITY;
        }
        -0.5 * self.chol.quad_form_inv(&self.diff(x))
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            self.chol
                .solve(&self.diff(x))
                .into_iter()
                .map(|v| -v)
                .collect(),
        )
    }

    fn has_gradient(&self) -> bool {
        true
    }
}
