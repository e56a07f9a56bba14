//! Effective sample size, autocovariances, acceptance summaries and
//! goodness-of-fit tests.

mod ess;
pub mod gof;
mod series;
mod summary;

pub use ess::{autocovariance, ess, Autocovariance, EssMethod, EssReport, MIN_ESS_LENGTH};
pub use gof::{ks_one_sample, ks_two_sample, sign_test, KsResult, SignTestResult};
pub use series::{asymptotic_variance, displacement_variance, mean_and_se, thin_by_act};
pub use summary::{acceptance_rate, summarize, TraceSummary};
