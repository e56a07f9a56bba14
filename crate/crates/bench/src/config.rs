use std::path::{Path, PathBuf};

use guided_mh::diagnostics::MIN_ESS_LENGTH;
use guided_mh::kernels::Support;
use guided_mh::prims::{CholFactor, RngStream};
use guided_mh::samplers::{ChainTarget, FixedTarget, KernelRegistry, KernelSpec};
use guided_mh::targets::{
    load_design_csv, simulate_hier_data, synthetic_logistic, wishart_identity, GammaProduct,
    Gaussian, LoadOptions, LogisticPosterior, PoissonHierData, PoissonHierGibbs,
    PositiveRestriction, StudentForm, StudentT, TargetModel,
};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

/// One experiment: a target, a list of kernels and how to run them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Steps per measured chain, burn-in included.
    pub iters: usize,
    /// Leading steps of each measured chain that are discarded.
    #[serde(default)]
    pub burnin: usize,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Write state columns to the trace CSVs.
    #[serde(default)]
    pub record_states: bool,
    /// Initial state; a target-specific default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    pub target: TargetConfig,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub kernels: Vec<KernelSpec>,
}

fn one() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetConfig {
    /// `N(mean·1, variance·I)`.
    Gaussian {
        dim: usize,
        #[serde(default)]
        mean: f64,
        #[serde(default = "unit")]
        variance: f64,
    },
    /// Multivariate t with identity scale.
    Student {
        dim: usize,
        #[serde(default = "three")]
        df: f64,
        #[serde(default)]
        location: f64,
    },
    /// `(1 + xᵀΣ⁻¹x/20)^{−35}` with `Σ` drawn from a Wishart with identity scale.
    ScaledT35 {
        dim: usize,
        #[serde(default = "fifty")]
        wishart_dof: usize,
        #[serde(default = "wishart_seed")]
        wishart_seed: u64,
    },
    /// Independent `G(shape, rate)` coordinates.
    Gamma { dim: usize, shape: f64, rate: f64 },
    /// `N(0, variance·I)` restricted to the positive orthant.
    HalfGaussian {
        dim: usize,
        #[serde(default = "unit")]
        variance: f64,
    },
    /// Central t restricted to the positive orthant.
    HalfStudent {
        dim: usize,
        #[serde(default = "three")]
        df: f64,
    },
    /// Bayesian logistic regression with independent `N(0, prior_sd²)` priors.
    /// Reads `data` when given, otherwise simulates a design.
    Logistic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<PathBuf>,
        #[serde(default = "sonar_rows")]
        rows: usize,
        #[serde(default = "sonar_features")]
        features: usize,
        #[serde(default)]
        data_seed: u64,
        #[serde(default = "ten")]
        prior_sd: f64,
        #[serde(default = "yes")]
        standardize: bool,
        #[serde(default)]
        has_header: bool,
    },
    /// `(α, β)` of the Poisson–Gamma hierarchical model, with `θ` updated by
    /// Gibbs after every kernel step.
    PoissonHier {
        #[serde(default = "hier_groups")]
        groups: usize,
        #[serde(default = "hier_per_group")]
        per_group: usize,
        #[serde(default = "two")]
        alpha_true: f64,
        #[serde(default = "unit")]
        beta_true: f64,
        #[serde(default)]
        data_seed: u64,
    },
}

fn unit() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn three() -> f64 {
    3.0
}
fn ten() -> f64 {
    10.0
}
fn fifty() -> usize {
    50
}
fn wishart_seed() -> u64 {
    20_190_517
}
fn sonar_rows() -> usize {
    208
}
fn sonar_features() -> usize {
    60
}
fn hier_groups() -> usize {
    25
}
fn hier_per_group() -> usize {
    5
}
fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    #[default]
    None,
    Diagonal,
    Full,
}

/// Where the autoregressive centre `x₀` comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterConfig {
    Named(CenterRule),
    Fixed(Vec<f64>),
}

impl Default for CenterConfig {
    fn default() -> Self {
        CenterConfig::Named(CenterRule::Origin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterRule {
    Origin,
    BurninMean,
}

/// Pre-measurement stage: random-walk burn-in and acceptance tuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    /// Rounds of random-walk burn-in; each round re-estimates the
    /// preconditioner from the previous one.
    #[serde(default)]
    pub burnin_rounds: usize,
    #[serde(default)]
    pub burnin_iters: usize,
    /// Initial random-walk scale.
    #[serde(default = "rwm_scale")]
    pub rwm_scale: f64,
    #[serde(default = "rwm_accept")]
    pub rwm_target_accept: f64,
    /// Steps between random-walk scale updates during burn-in.
    #[serde(default = "adapt_every")]
    pub adapt_every: usize,
    #[serde(default)]
    pub center: CenterConfig,
    #[serde(default)]
    pub preconditioner: Preconditioner,
    /// Diagonal loading added to estimated covariances, relative to their
    /// mean diagonal.
    #[serde(default = "loading")]
    pub loading: f64,
    /// Search `rho` of each family kernel for an acceptance rate in
    /// `target_accept`.
    #[serde(default)]
    pub tune_rho: bool,
    #[serde(default = "accept_band")]
    pub target_accept: [f64; 2],
    #[serde(default = "pilot_iters")]
    pub pilot_iters: usize,
    #[serde(default = "pilot_rounds")]
    pub pilot_rounds: usize,
}

fn rwm_scale() -> f64 {
    0.1
}
fn rwm_accept() -> f64 {
    0.25
}
fn adapt_every() -> usize {
    500
}
fn loading() -> f64 {
    1e-6
}
fn accept_band() -> [f64; 2] {
    [0.3, 0.5]
}
fn pilot_iters() -> usize {
    5000
}
fn pilot_rounds() -> usize {
    16
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            burnin_rounds: 0,
            burnin_iters: 0,
            rwm_scale: rwm_scale(),
            rwm_target_accept: rwm_accept(),
            adapt_every: adapt_every(),
            center: CenterConfig::default(),
            preconditioner: Preconditioner::default(),
            loading: loading(),
            tune_rho: false,
            target_accept: accept_band(),
            pilot_iters: pilot_iters(),
            pilot_rounds: pilot_rounds(),
        }
    }
}

/// Sweep over the first coordinate of the autoregressive centre,
/// `x₀ = (ξ, 0, …, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub xi: Vec<f64>,
}

/// A target ready to run: either a fixed density or the hierarchical model.
pub enum PreparedTarget {
    Fixed(Box<dyn TargetModel>),
    PoissonHier(PoissonHierData),
}

impl std::fmt::Debug for PreparedTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PreparedTarget::Fixed(t) => write!(f, "Fixed({})", t.name()),
            PreparedTarget::PoissonHier(d) => write!(f, "PoissonHier({}x{})", d.m, d.n),
        }
    }
}

impl PreparedTarget {
    pub fn name(&self) -> &str {
        match self {
            PreparedTarget::Fixed(t) => t.name(),
            PreparedTarget::PoissonHier(_) => "poisson-hier",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PreparedTarget::Fixed(t) => t.dim(),
            PreparedTarget::PoissonHier(_) => 2,
        }
    }

    pub fn support(&self) -> Support {
        match self {
            PreparedTarget::Fixed(t) => t.support(),
            PreparedTarget::PoissonHier(_) => Support::PositiveOrthant,
        }
    }

    pub fn has_gradient(&self) -> bool {
        match self {
            PreparedTarget::Fixed(t) => t.has_gradient(),
            PreparedTarget::PoissonHier(_) => true,
        }
    }

    /// Origin on `ℝᵈ`, all ones on the positive orthant.
    pub fn default_start(&self) -> Vec<f64> {
        match self.support() {
            Support::AllReals => vec![0.0; self.dim()],
            Support::PositiveOrthant => vec![1.0; self.dim()],
        }
    }

    /// The chain-facing target. The hierarchical model draws its initial `θ`
    /// from `rng`.
    pub fn chain_target<'a>(
        &'a self,
        start: &[f64],
        rng: &mut RngStream,
    ) -> BenchResult<Box<dyn ChainTarget + 'a>> {
        Ok(match self {
            PreparedTarget::Fixed(t) => Box::new(FixedTarget(t.as_ref())),
            PreparedTarget::PoissonHier(data) => {
                Box::new(PoissonHierGibbs::new(data.clone(), start, rng)?)
            }
        })
    }
}

impl TargetConfig {
    pub fn prepare(&self, base: &Path) -> BenchResult<PreparedTarget> {
        let fixed = |t: Box<dyn TargetModel>| Ok(PreparedTarget::Fixed(t));
        match *self {
            TargetConfig::Gaussian {
                dim,
                mean,
                variance,
            } => fixed(Box::new(Gaussian::new(
                vec![mean; dim],
                CholFactor::from_diagonal(&vec![variance; dim])?,
            )?)),
            TargetConfig::Student { dim, df, location } => fixed(Box::new(StudentT::new(
                vec![location; dim],
                CholFactor::identity(dim),
                StudentForm::Central { df },
            )?)),
            TargetConfig::ScaledT35 {
                dim,
                wishart_dof,
                wishart_seed,
            } => {
                let sigma = wishart_identity(wishart_dof, dim, wishart_seed)?;
                fixed(Box::new(StudentT::new(
                    vec![0.0; dim],
                    CholFactor::from_covariance(&sigma, dim)?,
                    StudentForm::Scaled35,
                )?))
            }
            TargetConfig::Gamma { dim, shape, rate } => {
                fixed(Box::new(GammaProduct::new(shape, rate, dim)?))
            }
            TargetConfig::HalfGaussian { dim, variance } => {
                fixed(Box::new(PositiveRestriction::new(Gaussian::new(
                    vec![0.0; dim],
                    CholFactor::from_diagonal(&vec![variance; dim])?,
                )?)))
            }
            TargetConfig::HalfStudent { dim, df } => fixed(Box::new(PositiveRestriction::new(
                StudentT::central(dim, df)?,
            ))),
            TargetConfig::Logistic {
                ref data,
                rows,
                features,
                data_seed,
                prior_sd,
                standardize,
                has_header,
            } => {
                let design = match data {
                    Some(path) => {
                        let path = if path.is_relative() {
                            base.join(path)
                        } else {
                            path.clone()
                        };
                        let opts = LoadOptions {
                            features: Some(features),
                            standardize,
                            has_header,
                        };
                        load_design_csv(&path, &opts)?
                    }
                    None => {
                        let mut design = synthetic_logistic(rows, features, data_seed)?;
                        if standardize {
                            design.standardize();
                        }
                        design
                    }
                };
                fixed(Box::new(LogisticPosterior::new(design, prior_sd)?))
            }
            TargetConfig::PoissonHier {
                groups,
                per_group,
                alpha_true,
                beta_true,
                data_seed,
            } => Ok(PreparedTarget::PoissonHier(simulate_hier_data(
                alpha_true, beta_true, groups, per_group, data_seed,
            )?)),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> BenchResult<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    /// Centres to run: one per `ξ` when sweeping, otherwise a single run.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.xi.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Keeps only kernels whose label or registry name is in `names`.
    pub fn retain_kernels(&mut self, names: &[String]) {
        if !names.is_empty() {
            self.kernels.retain(|k| {
                names
                    .iter()
                    .any(|n| n == &k.name || k.label.as_deref() == Some(n.as_str()))
            });
        }
    }

    /// Structural checks that do not need the target.
    pub fn check(&self) -> BenchResult<()> {
        let invalid = |m: String| Err(BenchError::Invalid(m));
        if self.iters <= self.burnin {
            return invalid(format!(
                "iters ({}) must exceed burnin ({})",
                self.iters, self.burnin
            ));
        }
        if self.iters - self.burnin < MIN_ESS_LENGTH {
            return invalid(format!(
                "iters - burnin must be at least {MIN_ESS_LENGTH} measured steps"
            ));
        }
        if self.thin == 0 {
            return invalid("thin must be at least 1".into());
        }
        if self.replications == 0 {
            return invalid("replications must be at least 1".into());
        }
        if self.replications >= 1 << 24 {
            return invalid("replications must be below 2^24".into());
        }
        if self.kernels.is_empty() {
            return invalid("no kernels selected".into());
        }
        if self.threads == Some(0) {
            return invalid("threads must be at least 1".into());
        }
        let mut labels: Vec<&str> = self.kernels.iter().map(|k| k.display_name()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate kernel label `{}`", w[0]));
        }
        let t = &self.tuning;
        if t.burnin_rounds > 0 && t.burnin_iters == 0 {
            return invalid("tuning.burnin_iters must be positive when burnin_rounds > 0".into());
        }
        if t.burnin_rounds == 0
            && (matches!(t.center, CenterConfig::Named(CenterRule::BurninMean))
                || t.preconditioner != Preconditioner::None)
        {
            return invalid(
                "tuning.center = \"burnin-mean\" and tuning.preconditioner need burnin_rounds > 0"
                    .into(),
            );
        }
        let [lo, hi] = t.target_accept;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return invalid(format!(
                "tuning.target_accept [{lo}, {hi}] is not an interval in (0, 1)"
            ));
        }
        if !(t.rwm_scale > 0.0) || !(t.loading >= 0.0) || t.adapt_every == 0 {
            return invalid(
                "tuning.rwm_scale, tuning.loading and tuning.adapt_every must be positive".into(),
            );
        }
        if t.tune_rho && (t.pilot_iters == 0 || t.pilot_rounds == 0) {
            return invalid("tuning.pilot_iters and tuning.pilot_rounds must be positive".into());
        }
        if let Some(s) = &self.sweep {
            if s.xi.is_empty() {
                return invalid("sweep.xi is empty".into());
            }
            if s.xi.iter().any(|x| !x.is_finite()) {
                return invalid("sweep.xi must be finite".into());
            }
        }
        Ok(())
    }

    /// Builds the target and checks every kernel against it.
    pub fn validate(&self, base: &Path) -> BenchResult<PreparedTarget> {
        self.check()?;
        let target = self.target.prepare(base)?;
        let d = target.dim();
        if let Some(start) = &self.start {
            if start.len() != d {
                return Err(BenchError::Invalid(format!(
                    "start has {} entries but the target has dimension {d}",
                    start.len()
                )));
            }
        }
        if let CenterConfig::Fixed(c) = &self.tuning.center {
            if c.len() != d {
                return Err(BenchError::Invalid(format!(
                    "tuning.center has {} entries but the target has dimension {d}",
                    c.len()
                )));
            }
        }
        let registry = KernelRegistry::standard();
        for spec in &self.kernels {
            registry
                .check_compatible(spec, target.support(), target.has_gradient())
                .map_err(|e| BenchError::Invalid(e.to_string()))?;
            if self.tuning.tune_rho || spec.rho.is_some() || !needs_rho(&spec.name) {
                continue;
            }
            return Err(BenchError::Invalid(format!(
                "kernel `{}` needs `rho` (or tuning.tune_rho = true)",
                spec.display_name()
            )));
        }
        Ok(target)
    }
}

/// Whether a registered kernel is built from a proposal family with `ρ`.
pub fn needs_rho(name: &str) -> bool {
    !matches!(name, "rwm" | "mala")
}

/// Reads and parses a config file without building the target.
pub fn load_config(path: &Path) -> BenchResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    ExperimentConfig::from_toml(&text, path)
}

/// Parses, checks and builds the target of a config file.
pub fn validate_config(path: &Path) -> BenchResult<(ExperimentConfig, PreparedTarget)> {
    let config = load_config(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let target = config.validate(base)?;
    Ok((config, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
iters = 2000
burnin = 200
seed = 7

[target]
kind = "gaussian"
dim = 3

[[kernels]]
name = "gmpcn"
rho = 0.5
"#;

    fn parse(text: &str) -> BenchResult<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.thin, 1);
        assert_eq!(c.replications, 1);
        assert_eq!(c.tuning, TuningConfig::default());
        assert_eq!(c.kernels[0].rho, Some(0.5));
        c.validate(Path::new(".")).unwrap();
    }

    #[test]
    fn missing_iters_is_named() {
        let err = parse(&MINIMAL.replace("iters = 2000\n", "")).unwrap_err();
        assert!(err.to_string().contains("iters"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn misspelled_key_is_rejected() {
        let err = parse(&MINIMAL.replace("iters = 2000", "itres = 2000")).unwrap_err();
        assert!(err.to_string().contains("itres"), "{err}");
    }

    #[test]
    fn unknown_keys_in_sections_are_rejected() {
        let text = MINIMAL.replace("dim = 3", "dim = 3\nvarianse = 2.0");
        assert!(parse(&text).unwrap_err().to_string().contains("varianse"));
        let text = MINIMAL.replace("rho = 0.5", "rho = 0.5\nrh0 = 0.1");
        assert!(parse(&text).unwrap_err().to_string().contains("rh0"));
        let text = format!("{MINIMAL}\n[tuning]\ntune_rh0 = true\n");
        assert!(parse(&text).unwrap_err().to_string().contains("tune_rh0"));
    }

    #[test]
    fn incompatible_kernel_is_named() {
        let text = MINIMAL.replace("name = \"gmpcn\"", "name = \"bg-gmh\"\nk = 2.0");
        let err = parse(&text).unwrap().validate(Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("bg-gmh") && msg.contains("positive orthant"),
            "{msg}"
        );
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn rho_required_without_tuning() {
        let mut c = parse(MINIMAL).unwrap();
        c.kernels = vec![KernelSpec::named("mala").with_scale(0.1)];
        c.validate(Path::new(".")).unwrap();
        c.target = TargetConfig::Gamma {
            dim: 2,
            shape: 2.0,
            rate: 1.0,
        };
        c.kernels = vec![KernelSpec::named("bg-mh").with_k(2.0)];
        let err = c.validate(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("rho"), "{err}");
        c.tuning.tune_rho = true;
        c.validate(Path::new(".")).unwrap();
    }

    #[test]
    fn structural_checks() {
        let mut c = parse(MINIMAL).unwrap();
        c.burnin = c.iters;
        assert!(c.check().is_err());
        let mut c = parse(MINIMAL).unwrap();
        c.replications = 0;
        assert!(c.check().is_err());
        let mut c = parse(MINIMAL).unwrap();
        c.kernels.push(c.kernels[0].clone());
        assert!(c.check().unwrap_err().to_string().contains("duplicate"));
        let mut c = parse(MINIMAL).unwrap();
        c.tuning.preconditioner = Preconditioner::Full;
        assert!(c.check().is_err());
        let mut c = parse(MINIMAL).unwrap();
        c.start = Some(vec![0.0; 2]);
        assert!(c.validate(Path::new(".")).is_err());
    }

    #[test]
    fn center_forms() {
        for (text, want) in [
            (
                "center = \"origin\"",
                CenterConfig::Named(CenterRule::Origin),
            ),
            (
                "center = \"burnin-mean\"",
                CenterConfig::Named(CenterRule::BurninMean),
            ),
            (
                "center = [1.0, 2.0, 3.0]",
                CenterConfig::Fixed(vec![1.0, 2.0, 3.0]),
            ),
        ] {
            let c = parse(&format!("{MINIMAL}\n[tuning]\n{text}\n")).unwrap();
            assert_eq!(c.tuning.center, want);
        }
        assert!(parse(&format!("{MINIMAL}\n[tuning]\ncenter = \"mean\"\n")).is_err());
    }

    #[test]
    fn every_target_kind_prepares() {
        let kinds = [
            "kind = \"gaussian\"\ndim = 2",
            "kind = \"student\"\ndim = 2",
            "kind = \"scaled-t35\"\ndim = 3",
            "kind = \"gamma\"\ndim = 2\nshape = 2.0\nrate = 1.0",
            "kind = \"half-gaussian\"\ndim = 2",
            "kind = \"half-student\"\ndim = 2",
            "kind = \"logistic\"\nrows = 20\nfeatures = 4",
            "kind = \"poisson-hier\"\ngroups = 5",
        ];
        for kind in kinds {
            let text = MINIMAL.replace("kind = \"gaussian\"\ndim = 3", kind);
            let c = parse(&text).unwrap_or_else(|e| panic!("{kind}: {e}"));
            let t = c.target.prepare(Path::new(".")).unwrap();
            let x = t.default_start();
            if let PreparedTarget::Fixed(m) = &t {
                assert!(m.log_density(&x).is_finite(), "{kind}");
            }
        }
    }

    #[test]
    fn sweep_points() {
        let c = parse(&format!("{MINIMAL}\n[sweep]\nxi = [0.0, 0.1]\n")).unwrap();
        assert_eq!(c.sweep_points(), vec![Some(0.0), Some(0.1)]);
        assert_eq!(parse(MINIMAL).unwrap().sweep_points(), vec![None]);
    }

    #[test]
    fn kernel_filter() {
        let mut c = parse(MINIMAL).unwrap();
        c.kernels.push(KernelSpec::named("mpcn").with_rho(0.5));
        c.retain_kernels(&["mpcn".to_string()]);
        assert_eq!(c.kernels.len(), 1);
        assert_eq!(c.kernels[0].name, "mpcn");
    }
}
