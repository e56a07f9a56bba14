use serde::{Deserialize, Serialize};

use super::{Support, TargetModel};
use crate::error::{check_dim, check_param, Result};
use crate::prims::{sample_gamma, standard_normal, CholFactor, RngStream};

/// Heavy-tailed multivariate forms with quadratic form `q = (x − x₀)ᵀΣ⁻¹(x − x₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum StudentForm {
    /// `(1 + q/20)^{−35}`.
    Scaled35,
    /// Student-t kernel `(1 + q/ν)^{−(ν+d)/2}`.
    Central { df: f64 },
}

impl StudentForm {
    /// `(exponent, divisor)` such that the log-density is `−a · ln(1 + q/c)`.
    fn coefficients(self, dim: usize) -> (f64, f64) {
        match self {
            StudentForm::Scaled35 => (35.0, 20.0),
            StudentForm::Central { df } => (0.5 * (df + dim as f64), df),
        }
    }
}

/// Unnormalised log-density of a multivariate heavy-tailed form.
pub fn mvt_logdensity(
    x: &[f64],
    location: &[f64],
    chol: &CholFactor,
    form: StudentForm,
) -> Result<f64> {
    check_dim(chol.dim(), x.len())?;
    check_dim(chol.dim(), location.len())?;
    let diff: Vec<f64> = x.iter().zip(location).map(|(a, b)| a - b).collect();
    let (a, c) = form.coefficients(x.len());
    Ok(-a * (chol.quad_form_inv(&diff) / c).ln_1p())
}

#[derive(Clone, Debug)]
pub struct StudentT {
    location: Vec<f64>,
    chol: CholFactor,
    form: StudentForm,
}

impl StudentT {
    pub fn new(location: Vec<f64>, chol: CholFactor, form: StudentForm) -> Result<Self> {
        check_dim(chol.dim(), location.len())?;
        if let StudentForm::Central { df } = form {
            check_param("df", df > 0.0 && df.is_finite(), format!("{df}"))?;
        }
        Ok(Self {
            location,
            chol,
            form,
        })
    }

    /// Central t with identity scale at the origin.
    pub fn central(dim: usize, df: f64) -> Result<Self> {
        Self::new(
            vec![0.0; dim],
            CholFactor::identity(dim),
            StudentForm::Central { df },
        )
    }

    pub fn form(&self) -> StudentForm {
        self.form
    }

    fn diff(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.location).map(|(a, b)| a - b).collect()
    }
}

impl TargetModel for StudentT {
    fn name(&self) -> &str {
        match self.form {
            StudentForm::Scaled35 => "scaled-t35",
            StudentForm::Central { .. } => "student-t",
        }
    }

    fn dim(&self) -> usize {
        self.location.len()
    }

    fn support(&self) -> Support {
        Support::AllReals
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if !Support::AllReals.contains(x) {
            return f64::NEG_INFINITY;
        }
        let (a, c) = self.form.coefficients(x.len());
        -a * (self.chol.quad_form_inv(&self.diff(x)) / c).ln_1p()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let diff = self.diff(x);
        let solved = self.chol.solve(&diff);
        let q: f64 = diff.iter().zip(&solved).map(|(a, b)| a * b).sum();
        let (a, c) = self.form.coefficients(x.len());
        let factor = -2.0 * a / (c + q);
        Some(solved.into_iter().map(|v| factor * v).collect())
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// Draw from a Wishart distribution with identity scale matrix via the
/// Bartlett decomposition. Returns the `dim × dim` matrix row-major.
pub fn wishart_identity(dof: usize, dim: usize, seed: u64) -> Result<Vec<f64>> {
    check_param("dof", dof >= dim && dim >= 1, format!("{dof} < dim {dim}"))?;
    let mut rng = RngStream::new(seed, 0);
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..i {
            a[i * dim + j] = standard_normal(&mut rng);
        }
        // χ²_{dof − i} = G((dof − i)/2, 1/2)
        let chi2 = sample_gamma(0.5 * (dof - i) as f64, 0.5, &mut rng)?;
        a[i * dim + i] = chi2.sqrt();
    }
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let s: f64 = (0..=j).map(|k| a[i * dim + k] * a[j * dim + k]).sum();
            out[i * dim + j] = s;
            out[j * dim + i] = s;
        }
    }
    Ok(out)
}
