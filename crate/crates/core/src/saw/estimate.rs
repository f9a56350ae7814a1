use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Pinning};
use crate::models::TwoSpinParams;
use crate::rng::RngStream;
use crate::samplers::{Budget, MarginalSampler};

use super::boundary::boundary;
use super::flower::build_flower;
use super::walk::SawCursor;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SawEstimate {
    /// Unbiased estimate of μ_v(1).
    pub p: f64,
    pub boundary_size: usize,
    pub tree_size: usize,
    /// Oracle queries made by the black-box sampler.
    pub oracle_queries: u64,
    pub sampler_frames: u64,
}

/// Truncate the SAW tree at v with budget N, draw the boundary spins one by
/// one from the sampler on the flowered tree, then read the root marginal
/// off the tree recursion with those spins pinned.
#[allow(clippy::too_many_arguments)]
pub fn estimate_marginal_saw(
    g: &Graph,
    v: usize,
    tau: &Pinning,
    params: &TwoSpinParams,
    delta: f64,
    budget_n: f64,
    sampler: &dyn MarginalSampler,
    rng: &mut RngStream,
) -> Result<SawEstimate> {
    if let Some(c) = tau.get(v) {
        return Ok(SawEstimate { p: c as f64, boundary_size: 0, tree_size: 1, oracle_queries: 0, sampler_frames: 0 });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParams(format!("delta {delta} outside (0,1)")));
    }
    let s = boundary(&mut SawCursor::new(g, tau, v), delta, budget_n);
    let mut oracle = build_flower(g, v, &s, tau)?;
    let mut frames = 0;
    for id in oracle.boundary_nodes() {
        let mut budget = Budget::default();
        let c = sampler.sample(&mut oracle, id, rng, &mut budget)?;
        frames += budget.frames;
        oracle.set_boundary_spin(id, c);
    }
    let p = oracle.root_marginal(params)?.prob_one();
    Ok(SawEstimate {
        p,
        boundary_size: s.len(),
        tree_size: oracle.num_tree_nodes(),
        oracle_queries: oracle.queries,
        sampler_frames: frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{AjOptions, AjSampler};

    #[test]
    fn pinned_root_is_indicator() {
        let g = Graph::path(2);
        let tau = Pinning::from_pairs([(0, 1)]);
        let s = AjSampler { lambda: 0.3, opts: AjOptions::default() };
        let e = estimate_marginal_saw(&g, 0, &tau, &TwoSpinParams::hardcore(0.3), 0.2, 8.0, &s, &mut RngStream::new(1)).unwrap();
        assert_eq!(e.p, 1.0);
    }

    #[test]
    fn unit_budget_gives_indicator() {
        let g = Graph::cycle(6);
        let tau = Pinning::new();
        let s = AjSampler { lambda: 0.3, opts: AjOptions::default() };
        let mut rng = RngStream::new(2);
        for _ in 0..50 {
            let e = estimate_marginal_saw(&g, 0, &tau, &TwoSpinParams::hardcore(0.3), 0.2, 1.0, &s, &mut rng).unwrap();
            assert!(e.p == 0.0 || e.p == 1.0);
            assert_eq!(e.boundary_size, 1);
        }
    }
}
