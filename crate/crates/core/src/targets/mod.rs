//! Target densities, all unnormalised and with respect to Lebesgue measure.
//! Samplers apply the `μ` / `μ*` correction themselves.

mod gaussian;
mod hierarchical;
mod logistic;
mod positive;
mod student;

pub use gaussian::Gaussian;
pub use hierarchical::{
    gibbs_theta, hier_logpost, simulate_hier_data, HierConditional, PoissonHierData,
    PoissonHierGibbs, HYPER_PRIOR,
};
pub use logistic::{
    load_design_csv, logistic_grad, logistic_logpost, synthetic_logistic, Design, LoadOptions,
    LogisticPosterior,
};
pub use positive::{GammaProduct, PositiveRestriction};
pub use student::{mvt_logdensity, wishart_identity, StudentForm, StudentT};

pub use crate::kernels::Support;

/// A target density `Π(dx) ∝ exp(log_density(x)) dx`.
pub trait TargetModel: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn support(&self) -> Support;

    /// Unnormalised log-density; `−∞` off the support.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Gradient of `log_density`, when cheap to provide.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }
}

impl<T: TargetModel + ?Sized> TargetModel for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
}

/// Central finite-difference gradient, used to check analytic gradients.
pub fn finite_difference_gradient(target: &dyn TargetModel, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = target.log_density(&probe);
            probe[i] = x[i] - h;
            let down = target.log_density(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
