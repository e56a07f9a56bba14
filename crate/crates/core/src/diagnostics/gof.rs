//! Kolmogorov–Smirnov and sign tests used by the statistical test suites.

use std::f64::consts::PI;

use statrs::function::erf::erfc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size entering the asymptotic distribution.
    pub n: f64,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-(j * j) * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sf += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

fn ks_p_value(statistic: f64, n: f64) -> f64 {
    let root = n.sqrt();
    kolmogorov_sf((root + 0.12 + 0.11 / root) * statistic)
}

/// One-sample test of `samples` against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
        n,
    }
}

/// Two-sample test; ties across samples are stepped over together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, ne),
        n: ne,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTestResult {
    pub positives: usize,
    /// Non-zero observations.
    pub n: usize,
    pub p_value: f64,
}

/// Two-sided sign test for a zero median, normal approximation with
/// continuity correction. Exact zeros are dropped.
pub fn sign_test(samples: &[f64]) -> SignTestResult {
    let positives = samples.iter().filter(|v| **v > 0.0).count();
    let n = samples.iter().filter(|v| **v != 0.0).count();
    let half = n as f64 / 2.0;
    let diff = ((positives as f64 - half).abs() - 0.5).max(0.0);
    let z = diff / (n as f64 / 4.0).sqrt();
    SignTestResult {
        positives,
        n,
        p_value: if n == 0 { 1.0 } else { erfc(z / 2f64.sqrt()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prims::{standard_normal, uniform, RngStream};

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series are valid everywhere; compare them at the switch.
        for lambda in [0.9, 1.0, 1.18, 1.3] {
            let mut a = 0.0;
            for k in 1..=200 {
                let kf = k as f64;
                let t = (-2.0 * kf * kf * lambda * lambda).exp();
                a += if k % 2 == 1 { t } else { -t };
            }
            assert!((kolmogorov_sf(lambda) - 2.0 * a).abs() < 1e-12, "{lambda}");
        }
    }

    #[test]
    fn kolmogorov_known_quantiles() {
        // Standard asymptotic critical values.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn uniform_sample_passes() {
        let mut rng = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| uniform(&mut rng)).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).p_value > 0.01);
    }

    #[test]
    fn shifted_sample_fails() {
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| uniform(&mut rng) + 0.05).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).p_value < 1e-6);
    }

    #[test]
    fn one_sample_statistic_by_hand() {
        // ECDF of {0.1, 0.6} against U(0,1): sup distance is 0.4 just below 0.6.
        let r = ks_one_sample(&[0.6, 0.1], |x| x);
        assert!((r.statistic - 0.4).abs() < 1e-15);
    }

    #[test]
    fn two_sample_by_hand_and_with_ties() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5, 4.5]);
        // At 3.0 the ECDFs are 1 and 1/2.
        assert!((r.statistic - 0.5).abs() < 1e-15);
        let same = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 1.0, 2.0]);
        assert_eq!(same.statistic, 0.0);
    }

    #[test]
    fn two_sample_normal() {
        let mut rng = RngStream::new(3, 0);
        let a: Vec<f64> = (0..20_000).map(|_| standard_normal(&mut rng)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| standard_normal(&mut rng)).collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|v| 1.1 * v).collect();
        assert!(ks_two_sample(&a, &c).p_value < 0.01);
    }

    #[test]
    fn sign_test_cases() {
        let balanced: Vec<f64> = (0..1000)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!(sign_test(&balanced).p_value > 0.9);
        let skewed: Vec<f64> = (0..1000)
            .map(|i| if i % 3 == 0 { -1.0 } else { 1.0 })
            .collect();
        assert!(sign_test(&skewed).p_value < 1e-10);
        assert_eq!(sign_test(&[0.0, 0.0]).n, 0);
    }
}
