use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Direction;
use crate::samplers::ChainTrace;

/// Fraction of accepted measured steps.
pub fn acceptance_rate(trace: &ChainTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(trace.records.iter().filter(|r| r.accepted).count() as f64 / trace.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub kernel: String,
    pub target: String,
    pub n: usize,
    pub accept_rate: f64,
    pub log_target_mean: f64,
    pub log_target_var: f64,
    /// Guided kernels only.
    pub mean_inner_tries: Option<f64>,
    /// Fraction of measured steps ending in direction `+` (guided kernels only).
    pub direction_balance: Option<f64>,
    pub state_means: Vec<f64>,
    pub state_vars: Vec<f64>,
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

pub fn summarize(trace: &ChainTrace) -> Result<TraceSummary> {
    let accept_rate = acceptance_rate(trace)?;
    let n = trace.len();
    let (log_target_mean, log_target_var) = mean_var(trace.records.iter().map(|r| r.log_target));
    let guided = trace.is_guided();
    let mean_inner_tries = guided.then(|| {
        trace
            .records
            .iter()
            .map(|r| r.inner_tries as f64)
            .sum::<f64>()
            / n as f64
    });
    let direction_balance = guided.then(|| {
        trace
            .records
            .iter()
            .filter(|r| r.direction == Some(Direction::Plus))
            .count() as f64
            / n as f64
    });
    let (state_means, state_vars) = if trace.states.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (0..trace.dim)
            .map(|i| mean_var(trace.states.iter().map(move |s| s[i])))
            .unzip()
    };
    Ok(TraceSummary {
        kernel: trace.kernel.clone(),
        target: trace.target.clone(),
        n,
        accept_rate,
        log_target_mean,
        log_target_var,
        mean_inner_tries,
        direction_balance,
        state_means,
        state_vars,
    })
}
