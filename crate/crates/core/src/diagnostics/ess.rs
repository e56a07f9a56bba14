use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{check_param, Error, Result};

/// Biased autocovariances `γ(0), …, γ(max_lag)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Autocovariance {
    pub values: Vec<f64>,
    /// Set when the series is constant; every value is then zero.
    pub constant: bool,
}

fn fft_autocovariance(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    let forward: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    forward.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    inverse.process(&mut buf);
    let scale = (size * n) as f64;
    buf[..=max_lag].iter().map(|c| c.re / scale).collect()
}

pub fn autocovariance(series: &[f64], max_lag: usize) -> Result<Autocovariance> {
    check_param(
        "max_lag",
        series.len() > max_lag,
        format!("{max_lag} with only {} observations", series.len()),
    )?;
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series"));
    }
    if series.iter().all(|v| *v == series[0]) {
        return Ok(Autocovariance {
            values: vec![0.0; max_lag + 1],
            constant: true,
        });
    }
    Ok(Autocovariance {
        values: fft_autocovariance(series, max_lag),
        constant: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssMethod {
    InitialMonotoneSequence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssReport {
    pub ess: f64,
    pub ess_per_second: f64,
    pub n: usize,
    /// Integrated autocorrelation time `n / ess`.
    pub act: f64,
    /// Number of autocorrelation lags summed; always even.
    pub truncation_lag: usize,
    /// The estimate exceeds `n` because of negative autocorrelation.
    pub super_efficient: bool,
    pub method: EssMethod,
}

pub const MIN_ESS_LENGTH: usize = 100;

/// Effective sample size with Geyer's initial monotone positive sequence.
///
/// Autocorrelations are summed in adjacent pairs `Γ_k = ρ(2k) + ρ(2k+1)`;
/// summation stops at the first non-positive pair and later pairs are capped
/// by their predecessors. The first pair always enters. The integrated
/// autocorrelation time is floored at `1 / log10 n`, so strongly antithetic
/// chains report at most `n log10 n` and are flagged rather than clamped.
pub fn ess(series: &[f64], wall_time: f64) -> Result<EssReport> {
    let n = series.len();
    if n < MIN_ESS_LENGTH {
        return Err(Error::SeriesTooShort {
            need: MIN_ESS_LENGTH,
            got: n,
        });
    }
    let acov = autocovariance(series, n - 1)?;
    if acov.constant {
        return Err(Error::ConstantSeries);
    }
    let gamma0 = acov.values[0];
    let rho: Vec<f64> = acov.values.iter().map(|g| g / gamma0).collect();

    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut pairs = 0;
    while 2 * pairs + 1 < n {
        let mut pair = rho[2 * pairs] + rho[2 * pairs + 1];
        if pairs > 0 && pair <= 0.0 {
            break;
        }
        pair = pair.min(prev);
        sum += pair;
        prev = pair;
        pairs += 1;
    }
    let floor = 1.0 / (n as f64).log10();
    let act = (2.0 * sum - 1.0).max(floor);
    let ess = n as f64 / act;
    Ok(EssReport {
        ess,
        ess_per_second: if wall_time > 0.0 {
            ess / wall_time
        } else {
            f64::NAN
        },
        n,
        act,
        truncation_lag: 2 * pairs,
        super_efficient: ess > n as f64,
        method: EssMethod::InitialMonotoneSequence,
    })
}
