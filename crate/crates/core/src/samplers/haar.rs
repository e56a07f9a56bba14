use std::sync::Arc;

use super::{accept, finite_or_neg_inf, ChainState, Kernel, StepOutcome};
use crate::error::{check_dim, check_param, Error, Result};
use crate::group::Direction;
use crate::kernels::{HaarFamily, Support};
use crate::prims::RngStream;
use crate::targets::TargetModel;

pub const DEFAULT_MAX_TRIES: u32 = 1000;

fn check_state(fam: &dyn HaarFamily, target: &dyn TargetModel, x: &[f64]) -> Result<f64> {
    check_dim(fam.dim(), x.len())?;
    check_dim(target.dim(), x.len())?;
    let log_density = target.log_density(x);
    if !log_density.is_finite() {
        return Err(Error::OutOfSupport("target"));
    }
    Ok(log_density)
}

/// `log dΠ/dμ*(y)`, or `−∞` wherever it is undefined.
fn log_pi_star(fam: &dyn HaarFamily, log_density: f64, y: &[f64]) -> f64 {
    match fam.log_mu_star(y) {
        Ok(m) => finite_or_neg_inf(log_density - m),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn log_density_on(fam: &dyn HaarFamily, target: &dyn TargetModel, y: &[f64]) -> f64 {
    if fam.support().contains(y) {
        finite_or_neg_inf(target.log_density(y))
    } else {
        f64::NEG_INFINITY
    }
}

fn settle(
    state: &mut ChainState,
    y: Vec<f64>,
    log_density: f64,
    log_pi: f64,
    rng: &mut RngStream,
) -> bool {
    if accept(log_pi - state.log_pi, rng) {
        state.x = y;
        state.log_density = log_density;
        state.log_pi = log_pi;
        true
    } else {
        false
    }
}

/// Metropolis kernel of a family's own proposal `Q`, accepting against
/// `dΠ/dμ` where `μ` is the measure `Q` is reversible for.
#[derive(Clone, Debug)]
pub struct Metropolis {
    name: String,
    family: Arc<dyn HaarFamily>,
}

impl Metropolis {
    pub fn new(name: impl Into<String>, family: Arc<dyn HaarFamily>) -> Self {
        Self {
            name: name.into(),
            family,
        }
    }
}

impl Kernel for Metropolis {
    fn name(&self) -> &str {
        &self.name
    }

    fn proposal_support(&self) -> Support {
        self.family.support()
    }

    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState> {
        let log_density = check_state(self.family.as_ref(), target, &x)?;
        let log_pi = log_density - self.family.log_mu(&x);
        if !log_pi.is_finite() {
            return Err(Error::OutOfSupport("reference measure"));
        }
        Ok(ChainState {
            x,
            log_density,
            log_pi,
            grad: None,
            direction,
        })
    }

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let y = self.family.propose(&state.x, rng)?;
        let log_density = log_density_on(self.family.as_ref(), target, &y);
        let log_pi = finite_or_neg_inf(log_density - self.family.log_mu(&y));
        let accepted = settle(state, y, log_density, log_pi, rng);
        Ok(StepOutcome {
            accepted,
            inner_tries: 1,
        })
    }
}

/// Metropolis–Haar kernel: Haar-mixture proposal, accepting against `dΠ/dμ*`.
#[derive(Clone, Debug)]
pub struct MetropolisHaar {
    name: String,
    family: Arc<dyn HaarFamily>,
}

impl MetropolisHaar {
    pub fn new(name: impl Into<String>, family: Arc<dyn HaarFamily>) -> Self {
        Self {
            name: name.into(),
            family,
        }
    }

    pub fn family(&self) -> &Arc<dyn HaarFamily> {
        &self.family
    }
}

fn init_star(
    fam: &dyn HaarFamily,
    target: &dyn TargetModel,
    x: Vec<f64>,
    direction: Direction,
) -> Result<ChainState> {
    let log_density = check_state(fam, target, &x)?;
    let log_pi = log_density - fam.log_mu_star(&x)?;
    if !log_pi.is_finite() {
        return Err(Error::NonFinite(
            "log density against the reference measure",
        ));
    }
    Ok(ChainState {
        x,
        log_density,
        log_pi,
        grad: None,
        direction,
    })
}

impl Kernel for MetropolisHaar {
    fn name(&self) -> &str {
        &self.name
    }

    fn proposal_support(&self) -> Support {
        self.family.support()
    }

    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState> {
        init_star(self.family.as_ref(), target, x, direction)
    }

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let draw = self.family.haar_mixture_propose(&state.x, rng)?;
        let log_density = log_density_on(self.family.as_ref(), target, &draw.y);
        let log_pi = log_pi_star(self.family.as_ref(), log_density, &draw.y);
        let accepted = settle(state, draw.y, log_density, log_pi, rng);
        Ok(StepOutcome {
            accepted,
            inner_tries: 1,
        })
    }
}

/// Δ-guided Metropolis–Haar kernel on states `(x, z)`.
///
/// Haar-mixture proposals are redrawn until `Δy` lies strictly on side `z`
/// of `Δx`. Acceptance keeps `z`; rejection keeps `x` and flips `z`.
#[derive(Clone, Debug)]
pub struct GuidedMetropolisHaar {
    name: String,
    family: Arc<dyn HaarFamily>,
    max_tries: u32,
    refresh_direction: bool,
}

impl GuidedMetropolisHaar {
    pub fn new(
        name: impl Into<String>,
        family: Arc<dyn HaarFamily>,
        max_tries: u32,
    ) -> Result<Self> {
        check_param("max_tries", max_tries >= 1, "must be at least 1")?;
        Ok(Self {
            name: name.into(),
            family,
            max_tries,
            refresh_direction: false,
        })
    }

    /// Redraw `z` uniformly before every step. The resulting chain has the
    /// same state marginal dynamics as the non-guided kernel.
    pub fn with_refreshed_direction(mut self, refresh: bool) -> Self {
        self.refresh_direction = refresh;
        self
    }

    pub fn max_tries(&self) -> u32 {
        self.max_tries
    }
}

impl Kernel for GuidedMetropolisHaar {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_guided(&self) -> bool {
        true
    }

    fn proposal_support(&self) -> Support {
        self.family.support()
    }

    fn init(
        &self,
        target: &dyn TargetModel,
        x: Vec<f64>,
        direction: Direction,
    ) -> Result<ChainState> {
        self.family.delta(&x)?;
        init_star(self.family.as_ref(), target, x, direction)
    }

    fn step(
        &self,
        state: &mut ChainState,
        target: &dyn TargetModel,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let fam = self.family.as_ref();
        if self.refresh_direction {
            state.direction = Direction::random(rng);
        }
        let dx = fam.delta(&state.x)?;
        let mut tries = 0;
        let y = loop {
            if tries == self.max_tries {
                return Err(Error::MaxTriesExceeded {
                    max_tries: self.max_tries,
                });
            }
            tries += 1;
            let draw = fam.haar_mixture_propose(&state.x, rng)?;
            if !fam.support().contains(&draw.y) {
                continue;
            }
            if let Ok(dy) = fam.delta(&draw.y) {
                if state.direction.admits(&dx, &dy) {
                    break draw.y;
                }
            }
        };
        let log_density = log_density_on(fam, target, &y);
        let log_pi = log_pi_star(fam, log_density, &y);
        let accepted = settle(state, y, log_density, log_pi, rng);
        if !accepted {
            state.direction = state.direction.flip();
        }
        Ok(StepOutcome {
            accepted,
            inner_tries: tries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Autoregressive, BetaGamma, ChiSquared};
    use crate::prims::CholFactor;
    use crate::targets::{GammaProduct, Gaussian};

    fn ar(rho: f64, d: usize) -> Arc<dyn HaarFamily> {
        Arc::new(Autoregressive::new(rho, vec![0.0; d], CholFactor::identity(d)).unwrap())
    }

    #[test]
    fn guided_bookkeeping_is_exact() {
        let target = Gaussian::standard(3);
        let kernel = GuidedMetropolisHaar::new("g", ar(0.5, 3), DEFAULT_MAX_TRIES).unwrap();
        let mut rng = RngStream::new(1, 0);
        let mut state = kernel
            .init(&target, vec![1.0, -0.5, 0.2], Direction::Plus)
            .unwrap();
        for _ in 0..20_000 {
            let before = state.clone();
            let out = kernel.step(&mut state, &target, &mut rng).unwrap();
            if out.accepted {
                assert_eq!(state.direction, before.direction);
            } else {
                assert_eq!(state.direction, before.direction.flip());
                assert_eq!(state.x, before.x);
                assert_eq!(state.log_pi, before.log_pi);
            }
            assert!(out.inner_tries >= 1);
        }
    }

    #[test]
    fn guided_moves_along_direction() {
        let target = Gaussian::standard(2);
        let fam = ar(0.3, 2);
        let kernel = GuidedMetropolisHaar::new("g", fam.clone(), DEFAULT_MAX_TRIES).unwrap();
        let mut rng = RngStream::new(2, 0);
        let mut state = kernel
            .init(&target, vec![0.4, 0.9], Direction::Minus)
            .unwrap();
        for _ in 0..5_000 {
            let before = state.clone();
            let out = kernel.step(&mut state, &target, &mut rng).unwrap();
            if out.accepted {
                let a = fam.delta(&before.x).unwrap();
                let b = fam.delta(&state.x).unwrap();
                assert!(before.direction.admits(&a, &b));
            }
        }
    }

    #[test]
    fn max_tries_is_loud() {
        // A single try cannot always land on the right side.
        let target = Gaussian::standard(2);
        let kernel = GuidedMetropolisHaar::new("g", ar(0.5, 2), 1).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut state = kernel
            .init(&target, vec![1.0, 1.0], Direction::Plus)
            .unwrap();
        let err = (0..1000)
            .find_map(|_| kernel.step(&mut state, &target, &mut rng).err())
            .unwrap();
        assert_eq!(err, Error::MaxTriesExceeded { max_tries: 1 });
        assert!(GuidedMetropolisHaar::new("g", ar(0.5, 2), 0).is_err());
    }

    #[test]
    fn init_rejects_centre_and_off_support() {
        let target = Gaussian::standard(2);
        let kernel = MetropolisHaar::new("m", ar(0.5, 2));
        assert!(matches!(
            kernel.init(&target, vec![0.0, 0.0], Direction::Plus),
            Err(Error::Degenerate(_))
        ));
        let positive = GammaProduct::new(2.0, 1.0, 2).unwrap();
        let bg: Arc<dyn HaarFamily> = Arc::new(BetaGamma::new(2.0, 0.5, 2).unwrap());
        let kernel = MetropolisHaar::new("bg", bg);
        assert!(kernel
            .init(&positive, vec![-1.0, 1.0], Direction::Plus)
            .is_err());
        assert!(kernel.init(&positive, vec![1.0], Direction::Plus).is_err());
    }

    #[test]
    fn metropolis_of_reference_measure_always_accepts() {
        // Π = μ makes the Metropolis ratio identically one.
        let fam: Arc<dyn HaarFamily> = Arc::new(ChiSquared::new(0.4, 3, 2).unwrap());
        let target = GammaProduct::new(1.5, 0.5, 2).unwrap();
        let kernel = Metropolis::new("chisq", fam);
        let mut rng = RngStream::new(4, 0);
        let mut state = kernel
            .init(&target, vec![1.0, 2.0], Direction::Plus)
            .unwrap();
        for _ in 0..2000 {
            assert!(kernel.step(&mut state, &target, &mut rng).unwrap().accepted);
        }
    }

    #[test]
    fn constant_shift_of_log_density_leaves_trajectory_unchanged() {
        #[derive(Debug)]
        struct Shifted(Gaussian, f64);
        impl TargetModel for Shifted {
            fn name(&self) -> &str {
                "shifted"
            }
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn support(&self) -> Support {
                Support::AllReals
            }
            fn log_density(&self, x: &[f64]) -> f64 {
                self.0.log_density(x) + self.1
            }
        }
        // A power-of-two shift keeps every difference bit-exact for the
        // magnitudes involved.
        let plain = Gaussian::standard(2);
        let shifted = Shifted(Gaussian::standard(2), 64.0);
        let kernel = GuidedMetropolisHaar::new("g", ar(0.5, 2), DEFAULT_MAX_TRIES).unwrap();
        let mut ra = RngStream::new(5, 0);
        let mut rb = RngStream::new(5, 0);
        let mut a = kernel
            .init(&plain, vec![1.0, 1.0], Direction::Plus)
            .unwrap();
        let mut b = kernel
            .init(&shifted, vec![1.0, 1.0], Direction::Plus)
            .unwrap();
        for _ in 0..2000 {
            kernel.step(&mut a, &plain, &mut ra).unwrap();
            kernel.step(&mut b, &shifted, &mut rb).unwrap();
            assert_eq!(a.x, b.x);
            assert_eq!(a.direction, b.direction);
        }
    }
}
