use statrs::function::gamma::{digamma, ln_gamma};

use super::{Support, TargetModel};
use crate::error::{check_param, Result};
use crate::prims::{sample_gamma, sample_poisson, RngStream};

/// Shape and rate of the Gamma prior on both `α` and `β`.
pub const HYPER_PRIOR: (f64, f64) = (0.05, 0.05);

/// Counts `x[m][n]` of the Poisson–Gamma model, stored row-major (`m × n`).
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonHierData {
    pub counts: Vec<u64>,
    pub m: usize,
    pub n: usize,
}

impl PoissonHierData {
    pub fn new(counts: Vec<u64>, m: usize, n: usize) -> Result<Self> {
        check_param("m", m >= 1, "must be at least 1")?;
        check_param("n", n >= 1, "must be at least 1")?;
        crate::error::check_dim(m * n, counts.len())?;
        Ok(Self { counts, m, n })
    }

    pub fn row(&self, m: usize) -> &[u64] {
        &self.counts[m * self.n..(m + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.m).map(|m| self.row(m).iter().sum()).collect()
    }
}

/// `θ_m ~ G(α, β)`, `x_{m,n} | θ_m ~ Poisson(θ_m)`.
pub fn simulate_hier_data(
    alpha: f64,
    beta: f64,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<PoissonHierData> {
    let mut rng = RngStream::new(seed, 0);
    let mut counts = Vec::with_capacity(m * n);
    for _ in 0..m {
        let theta = sample_gamma(alpha, beta, &mut rng)?;
        for _ in 0..n {
            counts.push(sample_poisson(theta, &mut rng)?);
        }
    }
    PoissonHierData::new(counts, m, n)
}

/// Draws `θ_m | α, β, x ~ G(Σ_n x_{m,n} + α, N + β)` for every group.
pub fn gibbs_theta(
    alpha: f64,
    beta: f64,
    data: &PoissonHierData,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    check_param("alpha", alpha > 0.0, format!("{alpha}"))?;
    check_param("beta", beta > 0.0, format!("{beta}"))?;
    let rate = data.n as f64 + beta;
    data.row_sums()
        .into_iter()
        .map(|s| sample_gamma(s as f64 + alpha, rate, rng))
        .collect()
}

fn log_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Joint log-density of `(α, β, θ)` without the likelihood of the counts.
pub fn hier_logpost(alpha: f64, beta: f64, theta: &[f64]) -> f64 {
    if !(alpha > 0.0 && beta > 0.0) || !Support::PositiveOrthant.contains(theta) {
        return f64::NEG_INFINITY;
    }
    let (s, r) = HYPER_PRIOR;
    theta
        .iter()
        .map(|&t| log_gamma_density(t, alpha, beta))
        .sum::<f64>()
        + log_gamma_density(alpha, s, r)
        + log_gamma_density(beta, s, r)
}

/// Conditional of `(α, β)` given `θ`, through the sufficient statistics
/// `Σ θ_m` and `Σ ln θ_m`.
#[derive(Clone, Debug)]
pub struct HierConditional {
    m: f64,
    sum_theta: f64,
    sum_log_theta: f64,
}

impl HierConditional {
    pub fn new(theta: &[f64]) -> Result<Self> {
        let mut out = Self {
            m: 0.0,
            sum_theta: 0.0,
            sum_log_theta: 0.0,
        };
        out.set_theta(theta)?;
        Ok(out)
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        check_param("theta", !theta.is_empty(), "empty")?;
        crate::error::check_positive(theta)?;
        self.m = theta.len() as f64;
        self.sum_theta = theta.iter().sum();
        self.sum_log_theta = theta.iter().map(|t| t.ln()).sum();
        Ok(())
    }
}

impl TargetModel for HierConditional {
    fn name(&self) -> &str {
        "poisson-hier"
    }

    fn dim(&self) -> usize {
        2
    }

    fn support(&self) -> Support {
        Support::PositiveOrthant
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if x.len() != 2 || !Support::PositiveOrthant.contains(x) {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (x[0], x[1]);
        let (s, r) = HYPER_PRIOR;
        self.m * (a * b.ln() - ln_gamma(a)) + (a - 1.0) * self.sum_log_theta - b * self.sum_theta
            + log_gamma_density(a, s, r)
            + log_gamma_density(b, s, r)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.len() != 2 || !Support::PositiveOrthant.contains(x) {
            return None;
        }
        let (a, b) = (x[0], x[1]);
        let (s, r) = HYPER_PRIOR;
        Some(vec![
            self.m * (b.ln() - digamma(a)) + self.sum_log_theta + (s - 1.0) / a - r,
            self.m * a / b - self.sum_theta + (s - 1.0) / b - r,
        ])
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// The `(α, β)` conditional with `θ` refreshed by a Gibbs draw after every
/// kernel step.
#[derive(Clone, Debug)]
pub struct PoissonHierGibbs {
    data: PoissonHierData,
    theta: Vec<f64>,
    conditional: HierConditional,
}

impl PoissonHierGibbs {
    /// Starts from `θ` drawn at the initial hyperparameters.
    pub fn new(data: PoissonHierData, start: &[f64], rng: &mut RngStream) -> Result<Self> {
        crate::error::check_dim(2, start.len())?;
        let theta = gibbs_theta(start[0], start[1], &data, rng)?;
        let conditional = HierConditional::new(&theta)?;
        Ok(Self {
            data,
            theta,
            conditional,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn data(&self) -> &PoissonHierData {
        &self.data
    }
}

impl crate::samplers::ChainTarget for PoissonHierGibbs {
    fn model(&self) -> &dyn TargetModel {
        &self.conditional
    }

    fn refresh(&mut self, x: &[f64], rng: &mut RngStream) -> Result<bool> {
        self.theta = gibbs_theta(x[0], x[1], &self.data, rng)?;
        self.conditional.set_theta(&self.theta)?;
        Ok(true)
    }
}
