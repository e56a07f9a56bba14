use std::path::Path;

use super::{Support, TargetModel};
use crate::error::{check_dim, check_param, Error, Result};
use crate::prims::{standard_normal, uniform, RngStream};

/// Design matrix (row-major `n × d`) with binary responses.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub n: usize,
    pub d: usize,
}

impl Design {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: usize) -> Result<Self> {
        check_param("d", d >= 1, "must be at least 1")?;
        check_dim(y.len() * d, x.len())?;
        if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(Error::InvalidParameter {
                name: "y",
                reason: "labels must be 0 or 1".into(),
            });
        }
        Ok(Self {
            n: y.len(),
            x,
            y,
            d,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Centres every column and scales it to unit standard deviation.
    /// Constant columns are only centred.
    pub fn standardize(&mut self) {
        let n = self.n as f64;
        for j in 0..self.d {
            let mean = (0..self.n).map(|i| self.x[i * self.d + j]).sum::<f64>() / n;
            let var = (0..self.n)
                .map(|i| (self.x[i * self.d + j] - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0).max(1.0);
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.n {
                let v = &mut self.x[i * self.d + j];
                *v = (*v - mean) / sd;
            }
        }
    }

    fn linear_predictor(&self, beta: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let beta = beta.to_vec();
        (0..self.n).map(move |i| self.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum())
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn prior_precision(prior_sd: f64) -> Result<f64> {
    check_param("prior_sd", prior_sd > 0.0, format!("{prior_sd}"))?;
    Ok(if prior_sd.is_infinite() {
        0.0
    } else {
        1.0 / (prior_sd * prior_sd)
    })
}

/// Bernoulli-logit log-likelihood plus an independent `N(0, prior_sd²)`
/// log-prior (without normalising constants). An infinite `prior_sd` drops the
/// prior.
pub fn logistic_logpost(beta: &[f64], design: &Design, prior_sd: f64) -> Result<f64> {
    check_dim(design.d, beta.len())?;
    let prec = prior_precision(prior_sd)?;
    let loglik: f64 = design
        .linear_predictor(beta)
        .zip(&design.y)
        .map(|(eta, y)| y * eta - softplus(eta))
        .sum();
    Ok(loglik - 0.5 * prec * beta.iter().map(|b| b * b).sum::<f64>())
}

pub fn logistic_grad(beta: &[f64], design: &Design, prior_sd: f64) -> Result<Vec<f64>> {
    check_dim(design.d, beta.len())?;
    let prec = prior_precision(prior_sd)?;
    let mut grad: Vec<f64> = beta.iter().map(|b| -prec * b).collect();
    for (i, (eta, y)) in design.linear_predictor(beta).zip(&design.y).enumerate() {
        let r = y - sigmoid(eta);
        for (g, xij) in grad.iter_mut().zip(design.row(i)) {
            *g += r * xij;
        }
    }
    Ok(grad)
}

#[derive(Clone, Debug)]
pub struct LogisticPosterior {
    design: Design,
    prior_sd: f64,
}

impl LogisticPosterior {
    pub fn new(design: Design, prior_sd: f64) -> Result<Self> {
        prior_precision(prior_sd)?;
        Ok(Self { design, prior_sd })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }
}

impl TargetModel for LogisticPosterior {
    fn name(&self) -> &str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.design.d
    }

    fn support(&self) -> Support {
        Support::AllReals
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if !Support::AllReals.contains(x) {
            return f64::NEG_INFINITY;
        }
        logistic_logpost(x, &self.design, self.prior_sd).unwrap_or(f64::NEG_INFINITY)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        logistic_grad(x, &self.design, self.prior_sd).ok()
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// Required number of feature columns; `None` takes it from the first row.
    pub features: Option<usize>,
    pub standardize: bool,
    pub has_header: bool,
}

impl Default for LoadOptions {
    /// The UCI Sonar layout: 60 features, then an `R`/`M` label, no header.
    fn default() -> Self {
        Self {
            features: Some(60),
            standardize: true,
            has_header: false,
        }
    }
}

fn parse_label(field: &str) -> Option<f64> {
    match field.trim() {
        "M" | "m" | "1" | "1.0" => Some(1.0),
        "R" | "r" | "0" | "0.0" => Some(0.0),
        _ => None,
    }
}

/// Reads comma-separated rows of features followed by a binary label.
/// Labels may be `R`/`M` (rock / mine) or `0`/`1`.
pub fn load_design_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Design> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .from_path(path)?;
    let mut features = opts.features;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let err = |reason: String| Error::Parse {
            path: shown.clone(),
            line,
            reason,
        };
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let want = *features.get_or_insert(record.len().saturating_sub(1));
        if want == 0 || record.len() != want + 1 {
            return Err(err(format!(
                "expected {} fields, found {}",
                want + 1,
                record.len()
            )));
        }
        for (j, field) in record.iter().take(want).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(format!("column {}: `{field}` is not a number", j + 1)))?;
            x.push(v);
        }
        let label = &record[want];
        y.push(parse_label(label).ok_or_else(|| err(format!("bad label `{label}`")))?);
    }
    let d = features.unwrap_or(0);
    if y.is_empty() {
        return Err(Error::Parse {
            path: shown,
            line: 0,
            reason: "no data rows".into(),
        });
    }
    let mut design = Design::new(x, y, d)?;
    if opts.standardize {
        design.standardize();
    }
    Ok(design)
}

/// Synthetic data with the Sonar shape: features with neighbouring-column
/// correlation 0.8, coefficients `N(0, 0.15²)`, Bernoulli-logit labels.
pub fn synthetic_logistic(n: usize, d: usize, seed: u64) -> Result<Design> {
    check_param("n", n >= 2, "need at least two rows")?;
    check_param("d", d >= 1, "must be at least 1")?;
    let mut rng = RngStream::new(seed, 0);
    let phi: f64 = 0.8;
    let innov = (1.0 - phi * phi).sqrt();
    let beta: Vec<f64> = (0..d).map(|_| 0.15 * standard_normal(&mut rng)).collect();
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut prev = standard_normal(&mut rng);
        let start = x.len();
        x.push(prev);
        for _ in 1..d {
            prev = phi * prev + innov * standard_normal(&mut rng);
            x.push(prev);
        }
        let eta: f64 = x[start..].iter().zip(&beta).map(|(a, b)| a * b).sum();
        y.push((uniform(&mut rng) < sigmoid(eta)) as u8 as f64);
    }
    Design::new(x, y, d)
}
