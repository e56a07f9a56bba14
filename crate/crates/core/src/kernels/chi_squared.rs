use super::{FamilyTag, GroupElement, HaarFamily, Support};
use crate::error::{check_dim, check_param, check_positive, Error, Result};
use crate::group::{delta_sum, PositiveScalar, Statistic};
use crate::prims::dist::log_gamma_unchecked;
use crate::prims::{standard_normal, RngStream};

/// Multivariate chi-squared family on `ℝ₊ᵈ`, reversible for `G(L/2, 1/2)^{⊗d}`.
///
/// Each coordinate moves by
/// `y = [((1−ρ)x)^{1/2} + ρ^{1/2} w₁]² + Σ_{l=2}^{L} ρ w_l²`.
/// `(ℝ₊, ×)` dilates every coordinate at once, giving `Q_g` with `N(0, g⁻¹)`
/// noise, `K(x, dg) = G(Ld/2, Δx/2)` with `Δx = Σ x_i`, and
/// `μ*(dx) ∝ (x₁⋯x_d)^{L/2−1} (Δx)^{−dL/2} dx`.
#[derive(Clone, Debug)]
pub struct ChiSquared {
    rho: f64,
    dof: u32,
    dim: usize,
    statistic: Statistic,
}

impl ChiSquared {
    pub fn new(rho: f64, dof: u32, dim: usize) -> Result<Self> {
        check_param(
            "rho",
            rho > 0.0 && rho < 1.0,
            format!("{rho} not in (0, 1)"),
        )?;
        check_param("dof", dof >= 1, "must be at least 1")?;
        check_param("dim", dim >= 1, "must be at least 1")?;
        Ok(Self {
            rho,
            dof,
            dim,
            statistic: Statistic::CoordinateSum,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    /// Draw from `Q_g(x, ·)` with `g` given by its logarithm.
    pub fn propose_at(&self, x: &[f64], log_g: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_positive(x)?;
        if !log_g.is_finite() {
            return Err(Error::NonFinite("g"));
        }
        let noise_var = self.rho * (-log_g).exp();
        let noise_sd = noise_var.sqrt();
        Ok(x.iter()
            .map(|xi| {
                let head = ((1.0 - self.rho) * xi).sqrt() + noise_sd * standard_normal(rng);
                let tail: f64 = (1..self.dof).map(|_| standard_normal(rng).powi(2)).sum();
                head * head + noise_var * tail
            })
            .collect())
    }
}

impl HaarFamily for ChiSquared {
    fn tag(&self) -> FamilyTag {
        FamilyTag::ChiSquared
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
        let delta = delta_sum(x)?;
        let shape = 0.5 * (self.dof as usize * self.dim) as f64;
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
                reason: "chi-squared family acts by a scalar".into(),
            }),
        }
    }

    fn propose(&self, x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self.propose_at(x, 0.0, rng)
    }

    fn log_mu(&self, x: &[f64]) -> f64 {
        if !Support::PositiveOrthant.contains(x) {
            return f64::NEG_INFINITY;
        }
        let a = 0.5 * self.dof as f64 - 1.0;
        x.iter().map(|xi| a * xi.ln() - 0.5 * xi).sum()
    }

    fn log_mu_star(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let delta = delta_sum(x)?;
        let a = 0.5 * self.dof as f64 - 1.0;
        let log_prod: f64 = if a == 0.0 {
            0.0
        } else {
            x.iter().map(|xi| xi.ln()).sum()
        };
        Ok(a * log_prod - 0.5 * (self.dof as usize * self.dim) as f64 * delta.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::gof::ks_one_sample;
    use crate::prims::sample_gamma;
    use statrs::distribution::{ContinuousCDF, Gamma};

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn near_zero_state_is_scaled_chisq() {
        let fam = ChiSquared::new(0.5, 1, 1).unwrap();
        let mut rng = RngStream::new(1, 0);
        let ys: Vec<f64> = (0..1_000_000)
            .map(|_| fam.propose_at(&[1e-300], 0.0, &mut rng).unwrap()[0])
            .collect();
        let (m, se) = mean_se(&ys);
        assert!((m - 0.5).abs() < 3.0 * se, "{m}");
    }

    #[test]
    fn conditional_mean() {
        let (rho, dof, g) = (0.3, 3u32, 2.0f64);
        let fam = ChiSquared::new(rho, dof, 2).unwrap();
        let x = [1.5, 4.0];
        let mut rng = RngStream::new(2, 0);
        let ys: Vec<Vec<f64>> = (0..1_000_000)
            .map(|_| fam.propose_at(&x, g.ln(), &mut rng).unwrap())
            .collect();
        for i in 0..2 {
            let col: Vec<f64> = ys.iter().map(|y| y[i]).collect();
            let (m, se) = mean_se(&col);
            let want = (1.0 - rho) * x[i] + rho * dof as f64 / g;
            assert!((m - want).abs() < 3.0 * se, "{m} vs {want}");
        }
    }

    #[test]
    fn stationary_for_translated_gamma() {
        for (i, &(dof, g)) in [(1u32, 1.0f64), (3, 0.5), (2, 4.0)].iter().enumerate() {
            let fam = ChiSquared::new(0.4, dof, 1).unwrap();
            let mut rng = RngStream::new(3, i as u64);
            let shape = 0.5 * dof as f64;
            let ys: Vec<f64> = (0..100_000)
                .map(|_| {
                    let x = sample_gamma(shape, g / 2.0, &mut rng).unwrap();
                    fam.propose_at(&[x], g.ln(), &mut rng).unwrap()[0]
                })
                .collect();
            let reference = Gamma::new(shape, g / 2.0).unwrap();
            let ks = ks_one_sample(&ys, |y| reference.cdf(y));
            assert!(ks.p_value > 0.01, "L={dof}, g={g}: {ks:?}");
        }
    }

    #[test]
    fn mixing_draw_mean() {
        // L = 1, d = 3, x = (1, 1, 2): g ~ G(3/2, 2) with mean 0.75.
        let fam = ChiSquared::new(0.5, 1, 3).unwrap();
        let mut rng = RngStream::new(4, 0);
        let gs: Vec<f64> = (0..400_000)
            .map(
                |_| match fam.mixing_draw(&[1.0, 1.0, 2.0], &mut rng).unwrap() {
                    GroupElement::Scalar(g) => g.value(),
                    _ => unreachable!(),
                },
            )
            .collect();
        let (m, se) = mean_se(&gs);
        assert!((m - 0.75).abs() < 3.0 * se);
    }

    #[test]
    fn log_mu_star_with_two_dof() {
        let fam = ChiSquared::new(0.5, 2, 3).unwrap();
        let x = [0.2, 1.7, 3.3];
        let want = -3.0 * (0.2f64 + 1.7 + 3.3).ln();
        assert!((fam.log_mu_star(&x).unwrap() - want).abs() < 1e-12);
        // L = 1, d = 2: (x₁x₂)^{-1/2} (x₁ + x₂)^{-1}.
        let fam1 = ChiSquared::new(0.5, 1, 2).unwrap();
        let got1 = fam1.log_mu_star(&[2.0, 3.0]).unwrap();
        assert!((got1 - (-0.5 * 6.0f64.ln() - 5.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ChiSquared::new(1.0, 1, 1).is_err());
        assert!(ChiSquared::new(0.5, 0, 1).is_err());
        let fam = ChiSquared::new(0.5, 1, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(fam.propose_at(&[-1.0], 0.0, &mut rng).is_err());
        assert!(fam.mixing_draw(&[0.0], &mut rng).is_err());
    }
}
