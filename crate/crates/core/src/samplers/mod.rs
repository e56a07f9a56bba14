//! Accept/reject machinery and the chain driver.
//!
//! Every kernel implements [`Kernel`] and is built by name through the
//! [`KernelRegistry`]. A step always consumes exactly one uniform for the
//! acceptance decision, whatever the proposal, so that seeded runs of
//! different kernels stay comparable.

mod baseline;
mod chain;
mod haar;
mod registry;

pub use baseline::{Mala, Rwm};
pub use chain::{
    run_chain, run_chain_with, ChainFailure, ChainOptions, ChainTrace, FixedTarget, StepRecord,
    TraceMeta,
};
pub use haar::{GuidedMetropolisHaar, Metropolis, MetropolisHaar, DEFAULT_MAX_TRIES};
pub use registry::{separate_center, KernelContext, KernelEntry, KernelRegistry, KernelSpec};

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::group::Direction;
use crate::kernels::Support;
use crate::prims::{uniform, RngStream};
use crate::targets::TargetModel;

/// Current point of a chain together with cached evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    /// Log-density of the target with respect to Lebesgue measure.
    pub log_density: f64,
    /// Log-density the kernel accepts against (target over its reference measure).
    pub log_pi: f64,
    pub grad: Option<Vec<f64>>,
    /// Only meaningful for guided kernels.
    pub direction: Direction,
}

/// Result of one transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub accepted: bool,
    /// Proposals drawn before one fell on the current side (guided only; 1 otherwise).
    pub inner_tries: u32,
}

/// A Markov transition kernel targeting the distribution of a [`TargetModel`].
pub trait Kernel: Send + Sync + Debug {
    fn name(&self) -> &str;

    fn is_guided(&self) -> bool {
        false
    }

    /// Support of the proposals. Kernels on the positive orthant can only be
    /// paired with targets on the positive orthant.
    fn proposal_support(&self) -> Support;

    fn needs_gradient(&self) -> bool {
        false
    }

    /// Evaluates the working density at `x`. Fails if it is not finite.
    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState>;

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome>;
}

/// Metropolis decision on `log_ratio = log π(y) − log π(x)`.
///
/// Always draws one uniform. Non-finite or NaN ratios reject.
pub fn accept(log_ratio: f64, rng: &mut RngStream) -> bool {
    let u = uniform(rng);
    !log_ratio.is_nan() && u.ln() < log_ratio
}

/// Outcome of [`metropolis_step`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetropolisMove {
    pub x: Vec<f64>,
    pub log_pi: f64,
    pub accepted: bool,
}

/// One Metropolis transition: draws `y` from `propose` and accepts with
/// probability `min{1, π(y)/π(x)}`. Non-finite `log_pi(y)` counts as `−∞`.
pub fn metropolis_step(
    x: &[f64],
    log_pi_x: f64,
    propose: impl FnOnce(&[f64], &mut RngStream) -> Result<Vec<f64>>,
    log_pi: impl Fn(&[f64]) -> f64,
    rng: &mut RngStream,
) -> Result<MetropolisMove> {
    if !log_pi_x.is_finite() {
        return Err(Error::NonFinite("log density at the current state"));
    }
    let y = propose(x, rng)?;
    let mut log_pi_y = log_pi(&y);
    if !log_pi_y.is_finite() {
        log_pi_y = f64::NEG_INFINITY;
    }
    Ok(if accept(log_pi_y - log_pi_x, rng) {
        MetropolisMove {
            x: y,
            log_pi: log_pi_y,
            accepted: true,
        }
    } else {
        MetropolisMove {
            x: x.to_vec(),
            log_pi: log_pi_x,
            accepted: false,
        }
    })
}

/// A target that may change between steps, as in a Gibbs sweep that
/// refreshes latent variables.
pub trait ChainTarget: Send {
    fn model(&self) -> &dyn TargetModel;

    /// Updates the target after a kernel step at `x`. Returns whether it changed.
    fn refresh(&mut self, _x: &[f64], _rng: &mut RngStream) -> Result<bool> {
        Ok(false)
    }
}

pub(crate) fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}
