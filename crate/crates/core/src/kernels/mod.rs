//! Reversible proposal families, their group translates `Q_g`, the mixing
//! kernels `K(x, dg)` and the reference measures `μ` and `μ*`.
//!
//! Each family implements [`HaarFamily`]; samplers only ever talk to the
//! trait. Log-densities of the reference measures carry no normalising
//! constant since only ratios reach an acceptance probability.

mod autoregressive;
mod beta_gamma;
mod chi_squared;

pub use autoregressive::Autoregressive;
pub use beta_gamma::{BetaGamma, ProductOrder};
pub use chi_squared::ChiSquared;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::{DeltaValue, PositiveScalar, PositiveVector, Statistic};
use crate::prims::{CholFactor, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Autoregressive,
    BetaGamma,
    ChiSquared,
}

/// Where a density is supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    AllReals,
    PositiveOrthant,
}

impl Support {
    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            Support::AllReals => x.iter().all(|v| v.is_finite()),
            Support::PositiveOrthant => x.iter().all(|v| *v > 0.0 && v.is_finite()),
        }
    }
}

/// Group element drawn by a mixing kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    Scalar(PositiveScalar),
    Vector(PositiveVector),
}

/// One draw from the Haar-mixture kernel `Q*(x, ·) = ∫ K(x, dg) Q_g(x, ·)`.
#[derive(Clone, Debug)]
pub struct MixtureDraw {
    pub g: GroupElement,
    pub y: Vec<f64>,
}

/// A reversible proposal family together with its Haar-mixture machinery.
pub trait HaarFamily: Send + Sync + Debug {
    fn tag(&self) -> FamilyTag;

    fn dim(&self) -> usize;

    /// Support of the reference measure (and of every proposal).
    fn support(&self) -> Support;

    /// Statistic used to split proposals into directions.
    fn statistic(&self) -> &Statistic;

    fn delta(&self, x: &[f64]) -> Result<DeltaValue> {
        self.statistic().eval(x)
    }

    /// Draws `g ~ K(x, dg)`.
    fn mixing_draw(&self, x: &[f64], rng: &mut RngStream) -> Result<GroupElement>;

    /// Draws `y ~ Q_g(x, ·)`.
    fn propose_translated(
        &self,
        x: &[f64],
        g: &GroupElement,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>>;

    /// Draws `y ~ Q(x, ·)`, i.e. `Q_g` at the identity.
    fn propose(&self, x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;

    /// Log-density of the reference measure `μ` of `Q` (−∞ off support).
    fn log_mu(&self, x: &[f64]) -> f64;

    /// Log-density of `μ*` with respect to Lebesgue measure.
    fn log_mu_star(&self, x: &[f64]) -> Result<f64>;

    fn haar_mixture_propose(&self, x: &[f64], rng: &mut RngStream) -> Result<MixtureDraw> {
        let g = self.mixing_draw(x, rng)?;
        let y = self.propose_translated(x, &g, rng)?;
        Ok(MixtureDraw { g, y })
    }
}

/// Serializable description of a family; dimension and preconditioner come
/// from the target and tuning stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Autoregressive {
        rho: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    BetaGamma {
        k: f64,
        rho: f64,
        #[serde(default)]
        order: ProductOrder,
    },
    ChiSquared {
        rho: f64,
        dof: u32,
    },
}

impl FamilySpec {
    pub fn tag(&self) -> FamilyTag {
        match self {
            FamilySpec::Autoregressive { .. } => FamilyTag::Autoregressive,
            FamilySpec::BetaGamma { .. } => FamilyTag::BetaGamma,
            FamilySpec::ChiSquared { .. } => FamilyTag::ChiSquared,
        }
    }

    /// Builds the family. The AR family defaults to the origin and identity
    /// when no centre or factor is supplied.
    pub fn build(&self, dim: usize, chol: Option<CholFactor>) -> Result<Arc<dyn HaarFamily>> {
        Ok(match self {
            FamilySpec::Autoregressive { rho, center } => {
                let center = center.clone().unwrap_or_else(|| vec![0.0; dim]);
                let chol = chol.unwrap_or_else(|| CholFactor::identity(dim));
                Arc::new(Autoregressive::new(*rho, center, chol)?)
            }
            FamilySpec::BetaGamma { k, rho, order } => {
                Arc::new(BetaGamma::new(*k, *rho, dim)?.with_order(*order))
            }
            FamilySpec::ChiSquared { rho, dof } => Arc::new(ChiSquared::new(*rho, *dof, dim)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_spec_roundtrip() {
        let spec = FamilySpec::BetaGamma {
            k: 2.0,
            rho: 0.3,
            order: ProductOrder::ModifiedLex,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FamilySpec>(&text).unwrap(), spec);
        let fam = spec.build(3, None).unwrap();
        assert_eq!(fam.tag(), FamilyTag::BetaGamma);
        assert_eq!(fam.dim(), 3);
    }

    #[test]
    fn family_spec_rejects_unknown_fields() {
        let text = r#"{"family":"chi-squared","rho":0.5,"dof":1,"rh0":1}"#;
        assert!(serde_json::from_str::<FamilySpec>(text).is_err());
    }
}
