//! Reversible Haar-mixture Metropolis kernels and their non-reversible
//! Δ-guided variants.
//!
//! A proposal family ([`kernels::HaarFamily`]) bundles a reversible kernel
//! `Q`, its translates `Q_g` under a totally ordered group, the mixing kernel
//! `K(x, dg)` and the reference measure `μ*`. Samplers ([`samplers::Kernel`])
//! turn a family into a Metropolis, Metropolis–Haar or guided
//! Metropolis–Haar chain, and are built by name through
//! [`samplers::KernelRegistry`].
//!
//! ```
//! use guided_mh::prelude::*;
//!
//! let target = Gaussian::standard(3);
//! let registry = KernelRegistry::standard();
//! let spec = KernelSpec::named("gmpcn").with_rho(0.5);
//! let kernel = registry.build_for(&spec, &target, &KernelContext::new(3)).unwrap();
//! let opts = ChainOptions::new(2_000, 500);
//! let trace = run_chain(kernel.as_ref(), &target, vec![1.0; 3], &opts, 42, 0).unwrap();
//! let report = ess(&trace.log_targets(), trace.wall_time).unwrap();
//! assert!(report.ess > 0.0);
//! ```

pub mod diagnostics;
pub mod error;
pub mod group;
pub mod kernels;
pub mod prims;
pub mod samplers;
pub mod targets;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::diagnostics::{acceptance_rate, ess, summarize, EssReport};
    pub use crate::error::{Error, Result};
    pub use crate::group::Direction;
    pub use crate::kernels::{FamilySpec, HaarFamily, Support};
    pub use crate::prims::{CholFactor, RngStream};
    pub use crate::samplers::{
        run_chain, run_chain_with, ChainOptions, ChainTarget, ChainTrace, Kernel, KernelContext,
        KernelRegistry, KernelSpec,
    };
    pub use crate::targets::{Gaussian, StudentT, TargetModel};
}
