//! Perfect marginal samplers.

mod abstract_ms;
mod aj;
mod hypergraph;
mod polymer;
mod spin;

pub use abstract_ms::{ms_abstract, AjScenario, Reveal, Scenario};
pub use aj::{aj_check_regime, aj_sample, aj_sample_oracle, AjOptions, AjSampler};
pub use hypergraph::{hypergraph_resolve, hypergraph_sample, ResolveContext};
pub use polymer::{mms_polymer, sample_polymer_nu, PolymerScenario};
pub use spin::{ms_spin_literal, mms_spin, WeakSpinSampler, WeakSpinScenario};

use crate::error::{Error, Result};
use crate::graph::Spin;
use crate::oracle::GraphOracle;
use crate::rng::RngStream;

/// Hard cap on recursive frames per top-level call.
pub const FRAME_LIMIT: u64 = 1_000_000;
/// Recursion depth cap for the samplers written as native recursion; it
/// keeps runaway override runs from overflowing the thread stack.
pub const DEPTH_LIMIT: usize = 4_000;

#[derive(Debug, Clone)]
pub struct Budget {
    pub frames: u64,
    pub limit: u64,
    depth: usize,
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(FRAME_LIMIT)
    }
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { frames: 0, limit, depth: 0, max_depth: 0 }
    }

    pub fn enter(&mut self) -> Result<()> {
        self.frames += 1;
        self.depth += 1;
        self.max_depth = self.max_depth.max(self.depth);
        if self.frames > self.limit || self.depth > DEPTH_LIMIT {
            return Err(Error::RecursionBudget { limit: self.limit });
        }
        Ok(())
    }

    pub fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Frame count only, for explicit-stack samplers.
    pub fn tick(&mut self) -> Result<()> {
        self.frames += 1;
        if self.frames > self.limit {
            return Err(Error::RecursionBudget { limit: self.limit });
        }
        Ok(())
    }
}

/// Black-box perfect marginal sampler queried through a graph oracle.
pub trait MarginalSampler: Sync {
    fn sample(&self, oracle: &mut dyn GraphOracle, u: usize, rng: &mut RngStream, budget: &mut Budget) -> Result<Spin>;
}
