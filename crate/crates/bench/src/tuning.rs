use guided_mh::diagnostics::acceptance_rate;
use guided_mh::prims::{CholFactor, RngStream};
use guided_mh::samplers::{
    run_chain_with, ChainOptions, ChainTrace, KernelContext, KernelRegistry, KernelSpec, Rwm,
};
use serde::Serialize;

use crate::config::{
    needs_rho, CenterConfig, CenterRule, ExperimentConfig, Preconditioner, PreparedTarget,
};
use crate::error::{BenchError, BenchResult};

/// Stream-id roles within one replication. Measured runs use the kernel index.
pub const ROLE_PILOT: u64 = 0x8000;
pub const ROLE_BURNIN: u64 = 0xFFFF;

/// `seq` in bits 40.., replication in bits 16..40, role in bits 0..16.
pub fn stream_id(replication: usize, role: u64, seq: u64) -> u64 {
    (seq << 40) | ((replication as u64) << 16) | role
}

/// Outcome of the random-walk burn-in for one replication.
#[derive(Clone, Debug, Serialize)]
pub struct BurnIn {
    pub start: Vec<f64>,
    pub center: Option<Vec<f64>>,
    #[serde(skip)]
    pub chol: Option<CholFactor>,
    pub rwm_scale: f64,
    /// Acceptance rate over the final round.
    pub accept_rate: Option<f64>,
}

impl BurnIn {
    pub fn context(&self, dim: usize) -> KernelContext {
        KernelContext {
            dim,
            center: self.center.clone(),
            chol: self.chol.clone(),
            start: Some(self.start.clone()),
        }
    }
}

pub(crate) fn chain_error(
    label: &str,
    replication: usize,
) -> impl Fn(guided_mh::samplers::ChainFailure) -> BenchError + '_ {
    move |failure| BenchError::Chain {
        label: label.to_string(),
        replication,
        failure: Box::new(failure),
    }
}

/// Runs the random-walk burn-in rounds and derives the start state, the
/// autoregressive centre and the preconditioner. `xi` overrides the centre
/// with `(ξ, 0, …, 0)`.
pub fn burn_in(
    config: &ExperimentConfig,
    target: &PreparedTarget,
    replication: usize,
    xi: Option<f64>,
) -> BenchResult<BurnIn> {
    let t = &config.tuning;
    let dim = target.dim();
    let mut x = config
        .start
        .clone()
        .unwrap_or_else(|| target.default_start());
    let mut scale = t.rwm_scale;
    let mut chol: Option<CholFactor> = None;
    let mut accept_rate = None;
    let mut last_round: Vec<Vec<f64>> = Vec::new();
    let mut seq = 0u64;
    let mut init_rng = RngStream::new(config.seed, stream_id(replication, ROLE_BURNIN, seq));
    let mut chain_target = target.chain_target(&x, &mut init_rng)?;
    let on_fail = chain_error("burn-in", replication);
    for _ in 0..t.burnin_rounds {
        let mut samples = Vec::with_capacity(t.burnin_iters);
        let (mut accepted, mut steps) = (0.0, 0usize);
        let mut remaining = t.burnin_iters;
        while remaining > 0 {
            let n = remaining.min(t.adapt_every);
            remaining -= n;
            seq += 1;
            let kernel = Rwm::new("rwm-burnin", scale, chol.clone())?;
            let opts = ChainOptions::new(n, 0).thinned(1);
            let trace = run_chain_with(
                &kernel,
                chain_target.as_mut(),
                x,
                &opts,
                config.seed,
                stream_id(replication, ROLE_BURNIN, seq),
            )
            .map_err(&on_fail)?;
            let acc = acceptance_rate(&trace)?;
            accepted += acc * n as f64;
            steps += n;
            scale *= (2.0 * (acc - t.rwm_target_accept)).exp();
            x = final_x(&trace);
            samples.extend(trace.states);
        }
        accept_rate = Some(accepted / steps as f64);
        if t.preconditioner != Preconditioner::None {
            let first = chol.is_none();
            chol = Some(estimate_preconditioner(
                &samples,
                t.preconditioner,
                t.loading,
            )?);
            if first {
                scale = 2.38 / (dim as f64).sqrt();
            }
        }
        last_round = samples;
    }
    let center = match (&t.center, xi) {
        (_, Some(xi)) => {
            let mut c = vec![0.0; dim];
            c[0] = xi;
            Some(c)
        }
        (CenterConfig::Fixed(c), None) => Some(c.clone()),
        (CenterConfig::Named(CenterRule::Origin), None) => None,
        (CenterConfig::Named(CenterRule::BurninMean), None) => Some(mean(&last_round)),
    };
    Ok(BurnIn {
        start: x,
        center,
        chol,
        rwm_scale: scale,
        accept_rate,
    })
}

fn final_x(trace: &ChainTrace) -> Vec<f64> {
    trace
        .final_state
        .as_ref()
        .map(|s| s.x.clone())
        .expect("completed chains keep their final state")
}

fn mean(samples: &[Vec<f64>]) -> Vec<f64> {
    let n = samples.len() as f64;
    let d = samples.first().map_or(0, Vec::len);
    let mut m = vec![0.0; d];
    for s in samples {
        for (mi, si) in m.iter_mut().zip(s) {
            *mi += si / n;
        }
    }
    m
}

/// Empirical covariance (or its diagonal) with diagonal loading
/// `loading × mean variance`.
pub fn estimate_preconditioner(
    samples: &[Vec<f64>],
    kind: Preconditioner,
    loading: f64,
) -> BenchResult<CholFactor> {
    if samples.len() < 2 {
        return Err(BenchError::Invalid(
            "preconditioner estimation needs at least two burn-in samples".into(),
        ));
    }
    let d = samples[0].len();
    let n = samples.len() as f64;
    let m = mean(samples);
    let mut cov = vec![0.0; d * d];
    for s in samples {
        for i in 0..d {
            let di = s[i] - m[i];
            for j in 0..=i {
                cov[i * d + j] += di * (s[j] - m[j]) / (n - 1.0);
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[j * d + i] = cov[i * d + j];
        }
    }
    let mean_var = (0..d).map(|i| cov[i * d + i]).sum::<f64>() / d as f64;
    let eps = loading * if mean_var > 0.0 { mean_var } else { 1.0 };
    Ok(match kind {
        Preconditioner::None => CholFactor::identity(d),
        Preconditioner::Diagonal => {
            let vars: Vec<f64> = (0..d).map(|i| cov[i * d + i] + eps).collect();
            CholFactor::from_diagonal(&vars)?
        }
        Preconditioner::Full => {
            for i in 0..d {
                cov[i * d + i] += eps;
            }
            CholFactor::from_covariance(&cov, d)?
        }
    })
}

/// Result of the `rho` search for one kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoSearch {
    pub rho: f64,
    /// Pilot acceptance at the returned `rho`.
    pub accept_rate: f64,
    pub pilots: usize,
    /// Whether the acceptance landed inside the target band.
    pub converged: bool,
}

/// Whether increasing `rho` makes the family's proposals bolder. The
/// Beta–Gamma thinning `b ~ Be(kρ, k(1−ρ))` concentrates at 1 as `ρ → 1`,
/// so there larger `rho` means smaller moves.
pub fn rho_widens_moves(kernel: &str) -> bool {
    !kernel.starts_with("bg-")
}

/// Bisection on `rho` until a pilot run's acceptance rate falls inside
/// `tuning.target_accept`.
pub fn tune_rho(
    config: &ExperimentConfig,
    target: &PreparedTarget,
    spec: &KernelSpec,
    burn: &BurnIn,
    replication: usize,
    kernel_index: usize,
) -> BenchResult<RhoSearch> {
    let t = &config.tuning;
    let [lo_acc, hi_acc] = t.target_accept;
    let registry = KernelRegistry::standard();
    let ctx = burn.context(target.dim());
    let widens = rho_widens_moves(&spec.name);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut rho = spec.rho.unwrap_or(0.5).clamp(1e-6, 1.0 - 1e-6);
    let mut best: Option<RhoSearch> = None;
    let on_fail = chain_error(spec.display_name(), replication);
    for pilot in 0..t.pilot_rounds {
        let role = ROLE_PILOT + kernel_index as u64;
        let stream = stream_id(replication, role, pilot as u64);
        let mut init_rng = RngStream::new(config.seed, stream | (1 << 63));
        let mut chain_target = target.chain_target(&burn.start, &mut init_rng)?;
        let trial = KernelSpec {
            rho: Some(rho),
            ..spec.clone()
        };
        let kernel = registry.build(&trial, &ctx)?;
        let opts = ChainOptions::new(t.pilot_iters, 0);
        let trace = run_chain_with(
            kernel.as_ref(),
            chain_target.as_mut(),
            burn.start.clone(),
            &opts,
            config.seed,
            stream,
        )
        .map_err(&on_fail)?;
        let acc = acceptance_rate(&trace)?;
        let converged = (lo_acc..=hi_acc).contains(&acc);
        let here = RhoSearch {
            rho,
            accept_rate: acc,
            pilots: pilot + 1,
            converged,
        };
        let closer = |b: &RhoSearch| {
            let gap = |a: f64| (a - a.clamp(lo_acc, hi_acc)).abs();
            gap(acc) < gap(b.accept_rate)
        };
        if best.as_ref().is_none_or(closer) {
            best = Some(here.clone());
        }
        if converged {
            return Ok(here);
        }
        let bolder = acc > hi_acc;
        if bolder == widens {
            lo = rho;
        } else {
            hi = rho;
        }
        rho = 0.5 * (lo + hi);
    }
    let mut best = best.expect("pilot_rounds is positive");
    best.pilots = t.pilot_rounds;
    Ok(best)
}

/// The kernel settings actually run: `rho` from the search when tuning applies.
pub fn tuned_spec(
    config: &ExperimentConfig,
    target: &PreparedTarget,
    spec: &KernelSpec,
    burn: &BurnIn,
    replication: usize,
    kernel_index: usize,
) -> BenchResult<(KernelSpec, Option<RhoSearch>)> {
    if !(config.tuning.tune_rho && needs_rho(&spec.name)) {
        return Ok((spec.clone(), None));
    }
    let search = tune_rho(config, target, spec, burn, replication, kernel_index)?;
    let spec = KernelSpec {
        rho: Some(search.rho),
        ..spec.clone()
    };
    Ok((spec, Some(search)))
}
