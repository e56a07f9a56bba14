use super::ess::ess;
use crate::error::{check_param, Result};

/// Sample mean and its Monte Carlo standard error `sqrt(var / ESS)`.
pub fn mean_and_se(series: &[f64]) -> Result<(f64, f64)> {
    let report = ess(series, 1.0)?;
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / report.ess).sqrt()))
}

/// Asymptotic variance of the sample mean, `n · Var(mean)`, estimated as
/// variance times integrated autocorrelation time.
pub fn asymptotic_variance(series: &[f64]) -> Result<f64> {
    let report = ess(series, 1.0)?;
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var * report.act)
}

/// Keeps every `⌈factor · act⌉`-th value, leaving a sample that is close to
/// independent for goodness-of-fit testing.
pub fn thin_by_act(series: &[f64], factor: f64) -> Result<Vec<f64>> {
    check_param("factor", factor > 0.0, format!("{factor}"))?;
    let report = ess(series, 1.0)?;
    let step = ((factor * report.act).ceil() as usize).max(1);
    Ok(series.iter().step_by(step).copied().collect())
}

/// `Σ_i Var(x_{t+lag, i} − x_{t, i})` over a trajectory of states.
pub fn displacement_variance(states: &[Vec<f64>], lag: usize) -> Result<f64> {
    check_param("lag", lag >= 1, "must be at least 1")?;
    check_param(
        "states",
        states.len() > lag + 1,
        format!("{} states for lag {lag}", states.len()),
    )?;
    let d = states[0].len();
    let m = (states.len() - lag) as f64;
    let mut total = 0.0;
    for i in 0..d {
        let diffs = states.windows(lag + 1).map(|w| w[lag][i] - w[0][i]);
        let mean = diffs.clone().sum::<f64>() / m;
        total += diffs.map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prims::{standard_normal, RngStream};

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        let innov = (1.0 - phi * phi).sqrt();
        let mut x = standard_normal(&mut rng);
        (0..n)
            .map(|_| {
                x = phi * x + innov * standard_normal(&mut rng);
                x
            })
            .collect()
    }

    #[test]
    fn ar1_asymptotic_variance() {
        // Unit-variance AR(1): n Var(mean) → (1 + φ)/(1 − φ) = 3 at φ = 0.5.
        let v = asymptotic_variance(&ar1(0.5, 200_000, 1)).unwrap();
        assert!((v - 3.0).abs() < 0.3, "{v}");
    }

    #[test]
    fn mean_se_covers_truth() {
        let xs = ar1(0.9, 100_000, 2);
        let (mean, se) = mean_and_se(&xs).unwrap();
        // sqrt(19 / 1e5) ≈ 0.0138
        assert!((se - 0.0138).abs() < 0.003, "{se}");
        assert!(mean.abs() < 4.0 * se);
    }

    #[test]
    fn thinning_uses_act() {
        let xs = ar1(0.9, 10_000, 3);
        let thinned = thin_by_act(&xs, 1.0).unwrap();
        assert!(
            thinned.len() < 1000 && thinned.len() > 200,
            "{}",
            thinned.len()
        );
    }

    #[test]
    fn displacement_of_random_walk() {
        // Unit Gaussian increments in two coordinates: Var = 2 · lag.
        let mut rng = RngStream::new(4, 0);
        let mut x = vec![0.0, 0.0];
        let states: Vec<Vec<f64>> = (0..100_000)
            .map(|_| {
                for v in x.iter_mut() {
                    *v += standard_normal(&mut rng);
                }
                x.clone()
            })
            .collect();
        for lag in [1, 4] {
            let v = displacement_variance(&states, lag).unwrap();
            assert!((v / (2.0 * lag as f64) - 1.0).abs() < 0.05, "{lag}: {v}");
        }
        assert!(displacement_variance(&states[..2], 1).is_err());
    }
}
