use std::sync::atomic::{AtomicU64, Ordering};

use super::{accept, finite_or_neg_inf, ChainState, Kernel, StepOutcome};
use crate::error::{check_dim, check_param, Error, Result};
use crate::group::Direction;
use crate::kernels::Support;
use crate::prims::{standard_normal, CholFactor, RngStream};
use crate::targets::TargetModel;

fn check_scale(scale: f64) -> Result<()> {
    check_param(
        "scale",
        scale > 0.0 && scale.is_finite(),
        format!("{scale}"),
    )
}

fn lebesgue_state(
    target: &dyn TargetModel,
    x: Vec<f64>,
    direction: Direction,
) -> Result<ChainState> {
    check_dim(target.dim(), x.len())?;
    let log_density = target.log_density(&x);
    if !log_density.is_finite() {
        return Err(Error::OutOfSupport("target"));
    }
    Ok(ChainState {
        x,
        log_density,
        log_pi: log_density,
        grad: None,
        direction,
    })
}

/// Gaussian random-walk Metropolis, `y = x + scale · L w`.
#[derive(Clone, Debug)]
pub struct Rwm {
    name: String,
    scale: f64,
    chol: Option<CholFactor>,
}

impl Rwm {
    pub fn new(name: impl Into<String>, scale: f64, chol: Option<CholFactor>) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            name: name.into(),
            scale,
            chol,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn set_scale(&mut self, scale: f64) -> Result<()> {
        check_scale(scale)?;
        self.scale = scale;
        Ok(())
    }
}

impl Kernel for Rwm {
    fn name(&self) -> &str {
        &self.name
    }

    fn proposal_support(&self) -> Support {
        Support::AllReals
    }

    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState> {
        if let Some(c) = &self.chol {
            check_dim(c.dim(), x.len())?;
        }
        lebesgue_state(target, x, direction)
    }

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let w: Vec<f64> = (0..state.x.len()).map(|_| standard_normal(rng)).collect();
        let noise = match &self.chol {
            Some(c) => c.mul_vec(&w),
            None => w,
        };
        let y: Vec<f64> = state
            .x
            .iter()
            .zip(&noise)
            .map(|(x, n)| x + self.scale * n)
            .collect();
        let log_density = finite_or_neg_inf(target.log_density(&y));
        let accepted = accept(log_density - state.log_pi, rng);
        if accepted {
            state.x = y;
            state.log_density = log_density;
            state.log_pi = log_density;
        }
        Ok(StepOutcome {
            accepted,
            inner_tries: 1,
        })
    }
}

/// Metropolis-adjusted Langevin algorithm with optional preconditioner `M = L Lᵀ`:
/// `y ~ N(x + (h²/2) M ∇log π(x), h² M)`.
#[derive(Debug)]
pub struct Mala {
    name: String,
    scale: f64,
    chol: Option<CholFactor>,
    nonfinite_gradients: AtomicU64,
}

impl Clone for Mala {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            scale: self.scale,
            chol: self.chol.clone(),
            nonfinite_gradients: AtomicU64::new(self.nonfinite_gradients()),
        }
    }
}

fn finite_gradient(target: &dyn TargetModel, x: &[f64]) -> Option<Vec<f64>> {
    target
        .gradient(x)
        .filter(|g| g.len() == x.len() && g.iter().all(|v| v.is_finite()))
}

impl Mala {
    pub fn new(name: impl Into<String>, scale: f64, chol: Option<CholFactor>) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            name: name.into(),
            scale,
            chol,
            nonfinite_gradients: AtomicU64::new(0),
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Proposals rejected because the gradient at them was unavailable or non-finite.
    pub fn nonfinite_gradients(&self) -> u64 {
        self.nonfinite_gradients.load(Ordering::Relaxed)
    }

    /// `x + (h²/2) M ∇log π(x)`.
    pub fn proposal_mean(&self, x: &[f64], grad: &[f64]) -> Vec<f64> {
        let drift = match &self.chol {
            Some(c) => c.mul_matrix_vec(grad),
            None => grad.to_vec(),
        };
        let half = 0.5 * self.scale * self.scale;
        x.iter().zip(&drift).map(|(a, b)| a + half * b).collect()
    }

    /// `‖L⁻¹ v‖²`.
    fn whitened_norm(&self, v: &[f64]) -> f64 {
        match &self.chol {
            Some(c) => c.quad_form_inv(v),
            None => v.iter().map(|a| a * a).sum(),
        }
    }

    fn log_transition(&self, from_mean: &[f64], to: &[f64]) -> f64 {
        let diff: Vec<f64> = to.iter().zip(from_mean).map(|(a, b)| a - b).collect();
        -self.whitened_norm(&diff) / (2.0 * self.scale * self.scale)
    }
}

impl Kernel for Mala {
    fn name(&self) -> &str {
        &self.name
    }

    fn proposal_support(&self) -> Support {
        Support::AllReals
    }

    fn needs_gradient(&self) -> bool {
        true
    }

    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState> {
        if let Some(c) = &self.chol {
            check_dim(c.dim(), x.len())?;
        }
        let mut state = lebesgue_state(target, x, direction)?;
        state.grad = Some(
            finite_gradient(target, &state.x)
                .ok_or(Error::NonFinite("gradient at the initial state"))?,
        );
        Ok(state)
    }

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let grad_x = match &state.grad {
            Some(g) => g.clone(),
            None => finite_gradient(target, &state.x)
                .ok_or(Error::NonFinite("gradient at the current state"))?,
        };
        let mean_x = self.proposal_mean(&state.x, &grad_x);
        let w: Vec<f64> = (0..state.x.len()).map(|_| standard_normal(rng)).collect();
        let noise = match &self.chol {
            Some(c) => c.mul_vec(&w),
            None => w,
        };
        let y: Vec<f64> = mean_x
            .iter()
            .zip(&noise)
            .map(|(m, n)| m + self.scale * n)
            .collect();
        let log_density = finite_or_neg_inf(target.log_density(&y));
        let (log_ratio, grad_y) = if log_density == f64::NEG_INFINITY {
            (f64::NEG_INFINITY, None)
        } else {
            match finite_gradient(target, &y) {
                Some(g) => {
                    let mean_y = self.proposal_mean(&y, &g);
                    let ratio = log_density - state.log_pi + self.log_transition(&mean_y, &state.x)
                        - self.log_transition(&mean_x, &y);
                    (ratio, Some(g))
                }
                None => {
                    self.nonfinite_gradients.fetch_add(1, Ordering::Relaxed);
                    (f64::NEG_INFINITY, None)
                }
            }
        };
        let accepted = accept(log_ratio, rng);
        if accepted {
            state.x = y;
            state.log_density = log_density;
            state.log_pi = log_density;
            state.grad = grad_y;
        } else {
            state.grad = Some(grad_x);
        }
        Ok(StepOutcome {
            accepted,
            inner_tries: 1,
        })
    }
}
