use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use super::CholFactor;
use crate::error::{check_dim, check_param, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Log of a `Gamma(shape, rate)` draw.
///
/// Shapes below one go through the boost identity
/// `G(a) = G(a + 1) · U^{1/a}`, evaluated in log space so that tiny shapes
/// never underflow to zero.
pub(crate) fn log_gamma_unchecked<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("shape validated").sample(rng);
        g.ln() - rate.ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0)
            .expect("shape validated")
            .sample(rng);
        let u = 1.0 - uniform(rng);
        g.ln() + u.ln() / shape - rate.ln()
    }
}

pub fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    check_param(
        "shape",
        shape > 0.0 && shape.is_finite(),
        format!("{shape}"),
    )?;
    check_param("rate", rate > 0.0 && rate.is_finite(), format!("{rate}"))?;
    Ok(log_gamma_unchecked(shape, rate, rng))
}

/// `Gamma(shape, rate)` with mean `shape / rate`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    sample_log_gamma(shape, rate, rng).map(f64::exp)
}

pub(crate) fn beta_unchecked<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let la = log_gamma_unchecked(a, 1.0, rng);
    let lb = log_gamma_unchecked(b, 1.0, rng);
    1.0 / (1.0 + (lb - la).exp())
}

/// `Beta(a, b)` drawn as a ratio of Gamma variates.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    check_param("a", a > 0.0 && a.is_finite(), format!("{a}"))?;
    check_param("b", b > 0.0 && b.is_finite(), format!("{b}"))?;
    Ok(beta_unchecked(a, b, rng))
}

/// Non-central chi-squared with `dof` degrees of freedom, built literally as
/// `(√λ + w₁)² + Σ_{l≥2} w_l²`.
pub fn sample_noncentral_chisq<R: Rng + ?Sized>(
    dof: u32,
    noncentrality: f64,
    rng: &mut R,
) -> Result<f64> {
    check_param("dof", dof >= 1, "must be at least 1")?;
    check_param(
        "noncentrality",
        noncentrality >= 0.0 && noncentrality.is_finite(),
        format!("{noncentrality}"),
    )?;
    let head = noncentrality.sqrt() + standard_normal(rng);
    let tail: f64 = (1..dof).map(|_| standard_normal(rng).powi(2)).sum();
    Ok(head * head + tail)
}

/// Draw from `N(mean, scale · L Lᵀ)`.
pub fn sample_mvnormal<R: Rng + ?Sized>(
    mean: &[f64],
    chol: &CholFactor,
    scale: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dim(chol.dim(), mean.len())?;
    if mean.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFinite("mean"));
    }
    check_param(
        "scale",
        scale > 0.0 && scale.is_finite(),
        format!("{scale}"),
    )?;
    let w: Vec<f64> = (0..mean.len()).map(|_| standard_normal(rng)).collect();
    let s = scale.sqrt();
    Ok(chol
        .mul_vec(&w)
        .iter()
        .zip(mean)
        .map(|(lw, m)| m + s * lw)
        .collect())
}

/// Log-density of `N(mean, scale · L Lᵀ)` at `x`.
pub fn mvnormal_logpdf(x: &[f64], mean: &[f64], chol: &CholFactor, scale: f64) -> Result<f64> {
    check_dim(chol.dim(), x.len())?;
    check_dim(chol.dim(), mean.len())?;
    check_param(
        "scale",
        scale > 0.0 && scale.is_finite(),
        format!("{scale}"),
    )?;
    let d = x.len() as f64;
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let q = chol.quad_form_inv(&diff) / scale;
    Ok(-0.5 * d * LN_2PI - 0.5 * (chol.log_det() + d * scale.ln()) - 0.5 * q)
}

pub fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<u64> {
    check_param("rate", rate > 0.0 && rate.is_finite(), format!("{rate}"))?;
    let draw: f64 = Poisson::new(rate)
        .map_err(|e| Error::InvalidParameter {
            name: "rate",
            reason: e.to_string(),
        })?
        .sample(rng);
    Ok(draw as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::gof::{ks_one_sample, ks_two_sample};
    use crate::prims::RngStream;
    use statrs::distribution::{Beta as SBeta, ChiSquared, ContinuousCDF, Gamma as SGamma, Normal};

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn mvnormal_moments() {
        let mut rng = RngStream::new(1, 0);
        let n = 1_000_000;
        let chol = CholFactor::identity(2);
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let x = sample_mvnormal(&[0.0, 0.0], &chol, 1.0, &mut rng).unwrap();
            sum[0] += x[0];
            sum[1] += x[1];
        }
        for s in sum {
            assert!((s / n as f64).abs() < 4e-3);
        }
    }

    #[test]
    fn mvnormal_covariance() {
        let mut rng = RngStream::new(2, 0);
        let n = 1_000_000;
        let m = [2.0, 0.6, 0.6, 1.0];
        let chol = CholFactor::from_covariance(&m, 2).unwrap();
        let scale = 1.5;
        let mut acc = [0.0; 4];
        for _ in 0..n {
            let x = sample_mvnormal(&[0.0, 0.0], &chol, scale, &mut rng).unwrap();
            acc[0] += x[0] * x[0];
            acc[1] += x[0] * x[1];
            acc[2] += x[1] * x[0];
            acc[3] += x[1] * x[1];
        }
        for (a, t) in acc.iter().zip(m.iter()) {
            let est = a / n as f64;
            assert!(
                (est - scale * t).abs() < 0.01 * scale * t,
                "{est} vs {}",
                scale * t
            );
        }
    }

    #[test]
    fn mvnormal_logpdf_at_mode() {
        let chol = CholFactor::identity(2);
        let lp = mvnormal_logpdf(&[0.0, 0.0], &[0.0, 0.0], &chol, 1.0).unwrap();
        assert!((lp + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn mvnormal_rejects_bad_input() {
        let mut rng = RngStream::new(0, 0);
        let chol = CholFactor::identity(2);
        assert!(sample_mvnormal(&[0.0], &chol, 1.0, &mut rng).is_err());
        assert!(sample_mvnormal(&[f64::NAN, 0.0], &chol, 1.0, &mut rng).is_err());
        assert!(sample_mvnormal(&[0.0, 0.0], &chol, 0.0, &mut rng).is_err());
    }

    #[test]
    fn gamma_mean() {
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let s: f64 = (0..n)
            .map(|_| sample_gamma(2.0, 4.0, &mut rng).unwrap())
            .sum();
        assert!((s / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn gamma_tiny_shape_stays_positive() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..1_000_000 {
            let g = sample_gamma(0.05, 0.05, &mut rng).unwrap();
            assert!(g > 0.0 && !g.is_nan());
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_gamma(0.0, 1.0, &mut rng).is_err());
        assert!(sample_gamma(1.0, -1.0, &mut rng).is_err());
        assert!(sample_beta(1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn gamma_gof() {
        for (i, &(shape, rate)) in [(0.3, 1.0), (0.05, 0.05), (2.0, 4.0), (7.5, 6.0)]
            .iter()
            .enumerate()
        {
            let mut rng = RngStream::new(5, i as u64);
            let xs: Vec<f64> = (0..100_000)
                .map(|_| sample_gamma(shape, rate, &mut rng).unwrap())
                .collect();
            let reference = SGamma::new(shape, rate).unwrap();
            let ks = ks_one_sample(&xs, |x| reference.cdf(x));
            assert!(ks.p_value > 0.01, "shape {shape}: {ks:?}");
        }
    }

    #[test]
    fn beta_uniform_and_gof() {
        let mut rng = RngStream::new(6, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_beta(1.0, 1.0, &mut rng).unwrap())
            .collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).p_value > 0.01);
        let ys: Vec<f64> = (0..100_000)
            .map(|_| sample_beta(0.4, 2.5, &mut rng).unwrap())
            .collect();
        let reference = SBeta::new(0.4, 2.5).unwrap();
        assert!(ks_one_sample(&ys, |x| reference.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn normal_gof() {
        let mut rng = RngStream::new(7, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| standard_normal(&mut rng)).collect();
        let reference = Normal::standard();
        assert!(ks_one_sample(&xs, |x| reference.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn noncentral_zero_is_central() {
        let mut rng = RngStream::new(8, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_noncentral_chisq(3, 0.0, &mut rng).unwrap())
            .collect();
        let reference = ChiSquared::new(3.0).unwrap();
        assert!(ks_one_sample(&xs, |x| reference.cdf(x)).p_value > 0.01);
        let (m, _) = mean_var(&xs);
        assert!((m - 3.0).abs() < 3.0 * (6.0f64 / 1e5).sqrt());
    }

    #[test]
    fn noncentral_moments() {
        let mut rng = RngStream::new(9, 0);
        let (dof, lambda) = (4u32, 2.5);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_noncentral_chisq(dof, lambda, &mut rng).unwrap())
            .collect();
        let (m, v) = mean_var(&xs);
        let l = dof as f64;
        let mean_t = l + lambda;
        let var_t = 2.0 * l + 4.0 * lambda;
        assert!((m - mean_t).abs() < 3.0 * (var_t / n as f64).sqrt());
        // Var of the sample variance is (κ4 + 2σ⁴)/n, with κ4 = 48(L + 4λ).
        let kappa4 = 48.0 * (l + 4.0 * lambda);
        let se_v = ((kappa4 + 2.0 * var_t * var_t) / n as f64).sqrt();
        assert!((v - var_t).abs() < 3.0 * se_v, "{v} vs {var_t} (se {se_v})");
    }

    #[test]
    fn noncentral_matches_poisson_mixture() {
        // χ²_L(λ) is χ²_{L+2K} with K ~ Poisson(λ/2).
        let mut rng = RngStream::new(10, 0);
        let mut other = RngStream::new(10, 1);
        let (dof, lambda) = (2u32, 3.0);
        let xs: Vec<f64> = (0..50_000)
            .map(|_| sample_noncentral_chisq(dof, lambda, &mut rng).unwrap())
            .collect();
        let ys: Vec<f64> = (0..50_000)
            .map(|_| {
                let k = sample_poisson(lambda / 2.0, &mut other).unwrap();
                let shape = (dof as f64 + 2.0 * k as f64) / 2.0;
                sample_gamma(shape, 0.5, &mut other).unwrap()
            })
            .collect();
        assert!(ks_two_sample(&xs, &ys).p_value > 0.01);
    }

    #[test]
    fn noncentral_rejects_negative() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_noncentral_chisq(1, -0.1, &mut rng).is_err());
        assert!(sample_noncentral_chisq(0, 1.0, &mut rng).is_err());
    }
}
