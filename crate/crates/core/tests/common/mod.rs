#![allow(dead_code)]

use guided_mh::diagnostics::{ks_one_sample, mean_and_se, thin_by_act};
use guided_mh::prelude::*;

pub fn run_states(
    spec: &KernelSpec,
    target: &dyn TargetModel,
    start: Vec<f64>,
    steps: usize,
    seed: u64,
) -> ChainTrace {
    let registry = KernelRegistry::standard();
    let mut ctx = KernelContext::new(target.dim());
    ctx.start = Some(start.clone());
    let kernel = registry.build_for(spec, target, &ctx).unwrap();
    let opts = ChainOptions::new(steps + steps / 10, steps / 10).thinned(1);
    run_chain(kernel.as_ref(), target, start, &opts, seed, 0).unwrap()
}

#[derive(Debug)]
pub struct MarginalCheck {
    pub coord: usize,
    pub ks_p: f64,
    pub mean_z: f64,
    pub second_moment_z: f64,
}

impl MarginalCheck {
    pub fn passes(&self) -> bool {
        self.ks_p > 0.01 && self.mean_z.abs() < 3.0 && self.second_moment_z.abs() < 3.0
    }
}

/// Per-coordinate KS on an ACT-thinned sample, plus first and second moments
/// standardised by their Monte Carlo standard errors.
pub fn check_marginals(
    trace: &ChainTrace,
    cdf: impl Fn(f64) -> f64,
    mean: f64,
    second_moment: f64,
) -> Vec<MarginalCheck> {
    (0..trace.dim)
        .map(|i| {
            let xs = trace.coordinate(i);
            let thinned = thin_by_act(&xs, 2.0).unwrap();
            let ks_p = ks_one_sample(&thinned, &cdf).p_value;
            let (m, se) = mean_and_se(&xs).unwrap();
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let (m2, se2) = mean_and_se(&sq).unwrap();
            MarginalCheck {
                coord: i,
                ks_p,
                mean_z: (m - mean) / se,
                second_moment_z: (m2 - second_moment) / se2,
            }
        })
        .collect()
}
