//! Oracle-equivalence suites: each sampler or construction is compared with
//! an exact or independent reference and reported as pass/fail lines.

mod batch;
mod boundary;
mod counting;
mod marginals;
mod saw;
pub mod saw_oracle;
mod scaling;

use serde::Serialize;

use crate::error::{Error, Result};

pub use batch::batch;
pub use boundary::boundary_bounds;
pub use counting::{chain_rule, coverage, cubic20, default_cases, extended_cases, CoverageCase};
pub use marginals::marginals;
pub use saw::{saw_identities, SawScope};
pub use scaling::{aggregate_aj_scaling, saw_scaling, saw_variance, ScalingReport, ScalingRow, VarianceReport, VarianceRow};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(suite: &str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { suite: suite.into(), name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    /// Draws per instance in the marginal suite.
    pub samples: u64,
    pub alpha: f64,
    pub seed: u64,
    /// Relative bias injected into the hardcore occupation coin.
    pub coin_skew: f64,
    /// Repetitions and batch size of the batch-fidelity suite.
    pub batch_reps: usize,
    pub batch_n: u64,
    /// FPRAS runs per coverage case.
    pub trials: usize,
    pub epsilon: f64,
    pub saw_scope: SawScope,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 10_000,
            alpha: 1e-3,
            seed: 1,
            coin_skew: 0.0,
            batch_reps: 200,
            batch_n: 1000,
            trials: 40,
            epsilon: 0.1,
            saw_scope: SawScope::Quick,
        }
    }
}

pub const SUITES: &[&str] = &["marginals", "batch", "saw", "boundary", "counting", "coverage"];

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    match name {
        "marginals" => marginals(cfg),
        "batch" => batch(cfg),
        "saw" => saw_identities(cfg),
        "boundary" => boundary_bounds(cfg),
        "counting" => chain_rule(cfg),
        "coverage" => coverage(cfg, &[counting::default_cases(), counting::extended_cases()].concat()),
        _ => Err(Error::InvalidParams(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}

/// |a - b| ≤ tol · max(|a|, |b|), exact equality included.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
