use serde::{Deserialize, Serialize};

use super::{FamilyTag, GroupElement, HaarFamily, Support};
use crate::error::{check_dim, check_param, check_positive, Error, Result};
use crate::group::{PositiveVector, Statistic};
use crate::prims::dist::{beta_unchecked, log_gamma_unchecked};
use crate::prims::RngStream;

/// Order used to compare Beta-Gamma states when choosing a direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductOrder {
    /// Scalar `x₁ × ⋯ × x_d` with the usual order.
    #[default]
    Product,
    /// The vector `x` itself under the modified lexicographic order.
    ModifiedLex,
}

/// Multivariate Beta-Gamma family on `ℝ₊ᵈ`, reversible for `G(k, 1)^{⊗d}`:
/// `y_i = b_i x_i + c_i` with `b_i ~ Be(kρ, k(1−ρ))`, `c_i ~ G(k(1−ρ), 1)`.
///
/// `(ℝ₊ᵈ, ×)` acts componentwise; `Q_g` replaces the rate of `c_i` by `g_i`,
/// `K(x, dg) = ⊗ G(k, x_i)` and `μ*(dx) = (x₁⋯x_d)⁻¹ dx`.
#[derive(Clone, Debug)]
pub struct BetaGamma {
    k: f64,
    rho: f64,
    dim: usize,
    statistic: Statistic,
}

impl BetaGamma {
    pub fn new(k: f64, rho: f64, dim: usize) -> Result<Self> {
        check_param("k", k > 0.0 && k.is_finite(), format!("{k}"))?;
        check_param(
            "rho",
            rho > 0.0 && rho < 1.0,
            format!("{rho} not in (0, 1)"),
        )?;
        check_param("dim", dim >= 1, "must be at least 1")?;
        Ok(Self {
            k,
            rho,
            dim,
            statistic: Statistic::CoordinateProduct,
        })
    }

    pub fn with_order(mut self, order: ProductOrder) -> Self {
        self.statistic = match order {
            ProductOrder::Product => Statistic::CoordinateProduct,
            ProductOrder::ModifiedLex => Statistic::IdentityVector,
        };
        self
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Draw from `Q_g(x, ·)` with `g` given by componentwise logarithms.
    pub fn propose_at(&self, x: &[f64], log_g: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, log_g.len())?;
        check_positive(x)?;
        if log_g.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("g"));
        }
        let (a, b) = (self.k * self.rho, self.k * (1.0 - self.rho));
        Ok(x.iter()
            .zip(log_g)
            .map(|(xi, lg)| {
                let thin = beta_unchecked(a, b, rng);
                let fresh = (log_gamma_unchecked(b, 1.0, rng) - lg).exp();
                thin * xi + fresh
            })
            .collect())
    }
}

impl HaarFamily for BetaGamma {
    fn tag(&self) -> FamilyTag {
        FamilyTag::BetaGamma
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self) -> Support {
        Support::PositiveOrthant
    }

    fn statistic(&self) -> &Statistic {
        &self.statistic
    }

    fn mixing_draw(&self, x: &[f64], rng: &mut RngStream) -> Result<GroupElement> {
        check_dim(self.dim, x.len())?;
        check_positive(x)?;
        let ln = x
            .iter()
            .map(|xi| log_gamma_unchecked(self.k, 1.0, rng) - xi.ln())
            .collect();
        Ok(GroupElement::Vector(PositiveVector::from_ln(ln)))
    }

    fn propose_translated(
        &self,
        x: &[f64],
        g: &GroupElement,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        match g {
            GroupElement::Vector(g) => self.propose_at(x, g.ln(), rng),
            GroupElement::Scalar(_) => Err(Error::InvalidParameter {
                name: "g",
                reason: "beta-gamma family acts componentwise".into(),
            }),
        }
    }

    fn propose(&self, x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self.propose_at(x, &vec![0.0; self.dim], rng)
    }

    fn log_mu(&self, x: &[f64]) -> f64 {
        if !Support::PositiveOrthant.contains(x) {
            return f64::NEG_INFINITY;
        }
        x.iter().map(|xi| (self.k - 1.0) * xi.ln() - xi).sum()
    }

    fn log_mu_star(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_positive(x)?;
        Ok(-x.iter().map(|xi| xi.ln()).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::gof::ks_one_sample;
    use crate::prims::sample_gamma;
    use statrs::distribution::{ContinuousCDF, Gamma};

    #[test]
    fn stationary_for_translated_gamma() {
        let (k, rho) = (2.5, 0.6);
        let fam = BetaGamma::new(k, rho, 1).unwrap();
        let mut rng = RngStream::new(1, 0);
        for g in [1.0f64, 3.0] {
            let ys: Vec<f64> = (0..100_000)
                .map(|_| {
                    let x = sample_gamma(k, g, &mut rng).unwrap();
                    fam.propose_at(&[x], &[g.ln()], &mut rng).unwrap()[0]
                })
                .collect();
            let reference = Gamma::new(k, g).unwrap();
            let ks = ks_one_sample(&ys, |y| reference.cdf(y));
            assert!(ks.p_value > 0.01, "g = {g}: {ks:?}");
        }
    }

    #[test]
    fn conditional_mean() {
        let (k, rho, g) = (1.5, 0.3, 2.0f64);
        let fam = BetaGamma::new(k, rho, 1).unwrap();
        let mut rng = RngStream::new(2, 0);
        let x = 3.0;
        let n = 1_000_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| fam.propose_at(&[x], &[g.ln()], &mut rng).unwrap()[0])
            .collect();
        let m = ys.iter().sum::<f64>() / n as f64;
        let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let want = rho * x + k * (1.0 - rho) / g;
        assert!(
            (m - want).abs() < 3.0 * (v / n as f64).sqrt(),
            "{m} vs {want}"
        );
    }

    #[test]
    fn one_step_is_exchangeable() {
        // Reversibility: (X₁, X₂) and (X₂, X₁) share a law under X₁ ~ G(k, 1).
        let (k, rho) = (1.2, 0.5);
        let fam = BetaGamma::new(k, rho, 1).unwrap();
        let mut rng = RngStream::new(3, 0);
        let n = 400_000;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x = sample_gamma(k, 1.0, &mut rng).unwrap();
                (x, fam.propose(&[x], &mut rng).unwrap()[0])
            })
            .collect();
        for &(a, b) in &[(0.5, 1.5), (1.0, 2.0), (0.3, 0.8), (2.0, 4.0)] {
            let d: Vec<f64> = pairs
                .iter()
                .map(|&(x1, x2)| {
                    let lhs = (x1 <= a && x2 <= b) as u8 as f64;
                    let rhs = (x1 <= b && x2 <= a) as u8 as f64;
                    lhs - rhs
                })
                .collect();
            let m = d.iter().sum::<f64>() / n as f64;
            let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(
                m.abs() < 3.0 * (v / n as f64).sqrt() + 1e-12,
                "({a},{b}): {m}"
            );
        }
    }

    #[test]
    fn mixing_draw_mean() {
        let fam = BetaGamma::new(2.0, 0.5, 1).unwrap();
        let mut rng = RngStream::new(4, 0);
        let n = 400_000;
        let gs: Vec<f64> = (0..n)
            .map(|_| match fam.mixing_draw(&[4.0], &mut rng).unwrap() {
                GroupElement::Vector(g) => g.values()[0],
                _ => unreachable!(),
            })
            .collect();
        let m = gs.iter().sum::<f64>() / n as f64;
        // G(2, 4): mean 0.5, variance 2/16.
        assert!((m - 0.5).abs() < 3.0 * (0.125f64 / n as f64).sqrt());
    }

    #[test]
    fn log_mu_star_and_support() {
        let fam = BetaGamma::new(1.0, 0.5, 4).unwrap();
        assert_eq!(fam.log_mu_star(&[1.0; 4]).unwrap(), 0.0);
        assert!(fam.log_mu_star(&[1.0, 1.0, -1.0, 1.0]).is_err());
        assert_eq!(fam.log_mu(&[1.0, 0.0, 1.0, 1.0]), f64::NEG_INFINITY);
        let mut rng = RngStream::new(5, 0);
        for _ in 0..10_000 {
            let draw = fam
                .haar_mixture_propose(&[0.01, 3.0, 1.0, 50.0], &mut rng)
                .unwrap();
            assert!(draw.y.iter().all(|v| *v > 0.0));
        }
        assert!(fam.propose(&[1.0, 1.0, 0.0, 1.0], &mut rng).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BetaGamma::new(0.0, 0.5, 1).is_err());
        assert!(BetaGamma::new(1.0, 1.0, 1).is_err());
        assert!(BetaGamma::new(1.0, 0.0, 1).is_err());
    }
}
