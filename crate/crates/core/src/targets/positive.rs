use super::{Support, TargetModel};
use crate::error::{check_param, Result};

/// Product of independent `G(shape, rate)` coordinates.
#[derive(Clone, Debug)]
pub struct GammaProduct {
    shape: f64,
    rate: f64,
    dim: usize,
}

impl GammaProduct {
    pub fn new(shape: f64, rate: f64, dim: usize) -> Result<Self> {
        check_param(
            "shape",
            shape > 0.0 && shape.is_finite(),
            format!("{shape}"),
        )?;
        check_param("rate", rate > 0.0 && rate.is_finite(), format!("{rate}"))?;
        check_param("dim", dim >= 1, "must be at least 1")?;
        Ok(Self { shape, rate, dim })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl TargetModel for GammaProduct {
    fn name(&self) -> &str {
        "gamma-product"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self) -> Support {
        Support::PositiveOrthant
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if !Support::PositiveOrthant.contains(x) {
            return f64::NEG_INFINITY;
        }
        x.iter()
            .map(|v| (self.shape - 1.0) * v.ln() - self.rate * v)
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            x.iter()
                .map(|v| (self.shape - 1.0) / v - self.rate)
                .collect(),
        )
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// Restriction of a target on `ℝᵈ` to the positive orthant.
#[derive(Clone, Debug)]
pub struct PositiveRestriction<T> {
    inner: T,
    name: String,
}

impl<T: TargetModel> PositiveRestriction<T> {
    pub fn new(inner: T) -> Self {
        let name = format!("{}+", inner.name());
        Self { inner, name }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: TargetModel> TargetModel for PositiveRestriction<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn support(&self) -> Support {
        Support::PositiveOrthant
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if !Support::PositiveOrthant.contains(x) {
            return f64::NEG_INFINITY;
        }
        self.inner.log_density(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.gradient(x)
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }
}
