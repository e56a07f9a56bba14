use super::{FamilyTag, GroupElement, HaarFamily, Support};
use crate::error::{check_dim, check_param, Error, Result};
use crate::group::{delta_quadform, PositiveScalar, Statistic};
use crate::prims::dist::log_gamma_unchecked;
use crate::prims::{standard_normal, CholFactor, RngStream};

/// Autoregressive (Crank–Nicolson) family on `ℝᵈ`:
/// `Q(x, ·) = N(x₀ + (1−ρ)^{1/2}(x − x₀), ρM)`, reversible for `N(x₀, M)`.
///
/// The group `(ℝ₊, ×)` acts by `x ↦ x₀ + g^{1/2}(x − x₀)`, so that
/// `Q_g(x, ·) = N(x₀ + (1−ρ)^{1/2}(x − x₀), g⁻¹ρM)`,
/// `K(x, dg) = G(d/2, Δx/2)` and `μ*(dx) ∝ (Δx)^{−d/2} dx`.
#[derive(Clone, Debug)]
pub struct Autoregressive {
    rho: f64,
    center: Vec<f64>,
    chol: CholFactor,
    statistic: Statistic,
}

impl Autoregressive {
    pub fn new(rho: f64, center: Vec<f64>, chol: CholFactor) -> Result<Self> {
        check_param(
            "rho",
            rho > 0.0 && rho <= 1.0,
            format!("{rho} not in (0, 1]"),
        )?;
        check_dim(chol.dim(), center.len())?;
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("center"));
        }
        let statistic = Statistic::QuadForm {
            center: center.clone(),
            chol: chol.clone(),
        };
        Ok(Self {
            rho,
            center,
            chol,
            statistic,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn chol(&self) -> &CholFactor {
        &self.chol
    }

    /// Same family re-centred at `center`.
    pub fn recentered(&self, center: Vec<f64>) -> Result<Self> {
        Self::new(self.rho, center, self.chol.clone())
    }

    fn quad(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.chol.quad_form_inv(&diff)
    }

    /// Draw from `Q_g(x, ·)` with `g` given by its logarithm.
    pub fn propose_at(&self, x: &[f64], log_g: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if !log_g.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: "must be a finite positive scalar".into(),
            });
        }
        let w: Vec<f64> = (0..x.len()).map(|_| standard_normal(rng)).collect();
        let noise = self.chol.mul_vec(&w);
        let drift = (1.0 - self.rho).sqrt();
        let spread = self.rho.sqrt() * (-0.5 * log_g).exp();
        Ok(x.iter()
            .zip(&self.center)
            .zip(&noise)
            .map(|((xi, ci), ni)| ci + drift * (xi - ci) + spread * ni)
            .collect())
    }
}

impl HaarFamily for Autoregressive {
    fn tag(&self) -> FamilyTag {
        FamilyTag::Autoregressive
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self) -> Support {
        Support::AllReals
    }

    fn statistic(&self) -> &Statistic {
        &self.statistic
    }

    fn mixing_draw(&self, x: &[f64], rng: &mut RngStream) -> Result<GroupElement> {
        let delta = delta_quadform(x, &self.center, &self.chol)?;
        let shape = 0.5 * self.dim() as f64;
        // G(d/2, Δx/2) = G(d/2, 1) / (Δx/2)
        let log_g = log_gamma_unchecked(shape, 1.0, rng) - (delta.ln() - std::f64::consts::LN_2);
        Ok(GroupElement::Scalar(PositiveScalar::from_ln(log_g)))
    }

    fn propose_translated(
        &self,
        x: &[f64],
        g: &GroupElement,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        match g {
            GroupElement::Scalar(g) => self.propose_at(x, g.ln(), rng),
            GroupElement::Vector(_) => Err(Error::InvalidParameter {
                name: "g",
                reason: "autoregressive family acts by a scalar".into(),
            }),
        }
    }

    fn propose(&self, x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self.propose_at(x, 0.0, rng)
    }

    fn log_mu(&self, x: &[f64]) -> f64 {
        -0.5 * self.quad(x)
    }

    fn log_mu_star(&self, x: &[f64]) -> Result<f64> {
        let delta = delta_quadform(x, &self.center, &self.chol)?;
        Ok(-0.5 * self.dim() as f64 * delta.ln())
    }
}
