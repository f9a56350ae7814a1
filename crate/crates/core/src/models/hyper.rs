use crate::graph::{Hypergraph, Spin};

/// Uniform distribution over independent sets of a hypergraph.
#[derive(Debug, Clone)]
pub struct HyperIs {
    pub hypergraph: Hypergraph,
}

impl HyperIs {
    pub fn new(hypergraph: Hypergraph) -> Self {
        HyperIs { hypergraph }
    }

    /// Sufficient condition 2^(k/2) ≥ √(8e)·k²·Δ for the resolver to run fast.
    pub fn in_regime(&self) -> bool {
        let k = self.hypergraph.k() as f64;
        let d = self.hypergraph.max_degree() as f64;
        2f64.powf(k / 2.0) >= (8.0 * std::f64::consts::E).sqrt() * k * k * d
    }

    pub fn weight(&self, sigma: &[Spin]) -> f64 {
        if self.hypergraph.is_independent(sigma) {
            1.0
        } else {
            0.0
        }
    }
}
