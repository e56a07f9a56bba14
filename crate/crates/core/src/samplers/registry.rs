use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    GuidedMetropolisHaar, Kernel, Mala, Metropolis, MetropolisHaar, Rwm, DEFAULT_MAX_TRIES,
};
use crate::error::{Error, Result};
use crate::kernels::{
    Autoregressive, BetaGamma, ChiSquared, FamilyTag, HaarFamily, ProductOrder, Support,
};
use crate::prims::CholFactor;
use crate::targets::TargetModel;

/// Kernel selection and tuning as written in an experiment config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// Registry key, e.g. `gmpcn`.
    pub name: String,
    /// Display name in outputs; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tries: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<ProductOrder>,
    #[serde(default)]
    pub refresh_direction: bool,
}

impl KernelSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_dof(mut self, dof: u32) -> Self {
        self.dof = Some(dof);
        self
    }

    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    fn need<T: Copy>(&self, value: Option<T>, key: &'static str) -> Result<T> {
        value.ok_or_else(|| Error::InvalidParameter {
            name: key,
            reason: format!("required by kernel `{}`", self.name),
        })
    }
}

/// Quantities supplied by the target and the tuning stage.
#[derive(Clone, Debug, Default)]
pub struct KernelContext {
    pub dim: usize,
    /// Centre `x₀` of the autoregressive family; the origin when absent.
    pub center: Option<Vec<f64>>,
    /// Preconditioner `M = L Lᵀ`; the identity when absent.
    pub chol: Option<CholFactor>,
    /// Initial state. An autoregressive centre that coincides with it is
    /// nudged off by a few ulps.
    pub start: Option<Vec<f64>>,
}

impl KernelContext {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }
}

/// Moves `center` off `start` by a relative `2⁻⁵²` when they coincide.
pub fn separate_center(center: &mut [f64], start: &[f64]) {
    if center == start {
        for c in center.iter_mut() {
            *c += f64::EPSILON * c.abs().max(1.0);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Variant {
    Metropolis,
    Haar,
    Guided,
}

type Builder = dyn Fn(&KernelSpec, &KernelContext) -> Result<Box<dyn Kernel>> + Send + Sync;

/// A registered kernel constructor.
pub struct KernelEntry {
    pub name: String,
    pub description: String,
    pub support: Support,
    pub needs_gradient: bool,
    pub guided: bool,
    builder: Box<Builder>,
}

impl std::fmt::Debug for KernelEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelEntry")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

/// Name → constructor map of every available kernel.
#[derive(Debug, Default)]
pub struct KernelRegistry {
    entries: BTreeMap<String, KernelEntry>,
}

fn build_family(
    tag: FamilyTag,
    spec: &KernelSpec,
    ctx: &KernelContext,
) -> Result<Arc<dyn HaarFamily>> {
    let rho = spec.need(spec.rho, "rho")?;
    Ok(match tag {
        FamilyTag::Autoregressive => {
            let mut center = ctx.center.clone().unwrap_or_else(|| vec![0.0; ctx.dim]);
            if let Some(start) = &ctx.start {
                separate_center(&mut center, start);
            }
            let chol = ctx
                .chol
                .clone()
                .unwrap_or_else(|| CholFactor::identity(ctx.dim));
            Arc::new(Autoregressive::new(rho, center, chol)?)
        }
        FamilyTag::BetaGamma => Arc::new(
            BetaGamma::new(spec.need(spec.k, "k")?, rho, ctx.dim)?
                .with_order(spec.order.unwrap_or_default()),
        ),
        FamilyTag::ChiSquared => {
            Arc::new(ChiSquared::new(rho, spec.need(spec.dof, "dof")?, ctx.dim)?)
        }
    })
}

fn family_support(tag: FamilyTag) -> Support {
    match tag {
        FamilyTag::Autoregressive => Support::AllReals,
        _ => Support::PositiveOrthant,
    }
}

impl KernelRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry with the baselines and the three variants of every family:
    ///
    /// | family | Metropolis | Metropolis–Haar | guided |
    /// |---|---|---|---|
    /// | autoregressive | `pcn` | `mpcn` | `gmpcn` |
    /// | Beta–Gamma | `bg-m` | `bg-mh` | `bg-gmh` |
    /// | Chi-squared | `chisq-m` | `chisq-mh` | `chisq-gmh` |
    ///
    /// plus `rwm` and `mala`.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(
            "rwm",
            "Gaussian random-walk Metropolis",
            Support::AllReals,
            false,
            false,
            |spec, ctx| {
                let scale = spec.need(spec.scale, "scale")?;
                Ok(Box::new(Rwm::new(
                    spec.display_name(),
                    scale,
                    ctx.chol.clone(),
                )?))
            },
        );
        reg.register(
            "mala",
            "Metropolis-adjusted Langevin algorithm",
            Support::AllReals,
            true,
            false,
            |spec, ctx| {
                let scale = spec.need(spec.scale, "scale")?;
                Ok(Box::new(Mala::new(
                    spec.display_name(),
                    scale,
                    ctx.chol.clone(),
                )?))
            },
        );
        let families = [
            (
                FamilyTag::Autoregressive,
                ["pcn", "mpcn", "gmpcn"],
                "autoregressive",
            ),
            (
                FamilyTag::BetaGamma,
                ["bg-m", "bg-mh", "bg-gmh"],
                "Beta-Gamma",
            ),
            (
                FamilyTag::ChiSquared,
                ["chisq-m", "chisq-mh", "chisq-gmh"],
                "Chi-squared",
            ),
        ];
        for (tag, names, label) in families {
            for (name, variant) in
                names
                    .into_iter()
                    .zip([Variant::Metropolis, Variant::Haar, Variant::Guided])
            {
                let description = match variant {
                    Variant::Metropolis => format!("Metropolis kernel of the {label} proposal"),
                    Variant::Haar => format!("Metropolis-Haar kernel, {label} family"),
                    Variant::Guided => format!("guided Metropolis-Haar kernel, {label} family"),
                };
                reg.register(
                    name,
                    &description,
                    family_support(tag),
                    false,
                    variant == Variant::Guided,
                    move |spec, ctx| {
                        let fam = build_family(tag, spec, ctx)?;
                        let name = spec.display_name();
                        Ok(match variant {
                            Variant::Metropolis => Box::new(Metropolis::new(name, fam)),
                            Variant::Haar => Box::new(MetropolisHaar::new(name, fam)),
                            Variant::Guided => Box::new(
                                GuidedMetropolisHaar::new(
                                    name,
                                    fam,
                                    spec.max_tries.unwrap_or(DEFAULT_MAX_TRIES),
                                )?
                                .with_refreshed_direction(spec.refresh_direction),
                            ),
                        })
                    },
                );
            }
        }
        reg
    }

    pub fn register(
        &mut self,
        name: &str,
        description: &str,
        support: Support,
        needs_gradient: bool,
        guided: bool,
        builder: impl Fn(&KernelSpec, &KernelContext) -> Result<Box<dyn Kernel>> + Send + Sync + 'static,
    ) {
        self.entries.insert(
            name.to_string(),
            KernelEntry {
                name: name.to_string(),
                description: description.to_string(),
                support,
                needs_gradient,
                guided,
                builder: Box::new(builder),
            },
        );
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&KernelEntry> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownKernel(name.to_string()))
    }

    /// Checks that the kernel can run on a target with the given support and
    /// gradient availability.
    pub fn check_compatible(
        &self,
        spec: &KernelSpec,
        support: Support,
        has_gradient: bool,
    ) -> Result<()> {
        let entry = self.get(&spec.name)?;
        let incompatible = |reason: &str| Error::Incompatible {
            kernel: spec.display_name().to_string(),
            reason: reason.to_string(),
        };
        if entry.support == Support::PositiveOrthant && support != Support::PositiveOrthant {
            return Err(incompatible(
                "proposals live on the positive orthant but the target does not",
            ));
        }
        if entry.needs_gradient && !has_gradient {
            return Err(incompatible("the target provides no gradient"));
        }
        Ok(())
    }

    pub fn build(&self, spec: &KernelSpec, ctx: &KernelContext) -> Result<Box<dyn Kernel>> {
        (self.get(&spec.name)?.builder)(spec, ctx)
    }

    /// [`check_compatible`](Self::check_compatible) followed by [`build`](Self::build).
    pub fn build_for(
        &self,
        spec: &KernelSpec,
        target: &dyn TargetModel,
        ctx: &KernelContext,
    ) -> Result<Box<dyn Kernel>> {
        self.check_compatible(spec, target.support(), target.has_gradient())?;
        self.build(spec, ctx)
    }
}
