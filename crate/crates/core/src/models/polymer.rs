use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{enumerate_connected_subgraphs, Graph, Spin};

/// Connected vertex set with a non-ground spin on each vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer {
    pub vertices: Vec<usize>,
    pub spins: Vec<Spin>,
}

impl Polymer {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn spin_of(&self, v: usize) -> Option<Spin> {
        self.vertices.binary_search(&v).ok().map(|i| self.spins[i])
    }
}

#[derive(Clone)]
pub enum PolymerWeight {
    /// w_γ = scale · exp(-θ|γ|)
    Geometric { scale: f64 },
    Custom(Arc<dyn Fn(&Polymer) -> f64 + Send + Sync>),
}

impl fmt::Debug for PolymerWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolymerWeight::Geometric { scale } => write!(f, "Geometric {{ scale: {scale} }}"),
            PolymerWeight::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Polymer model on a host graph. `theta` is the decay rate the weights are
/// promised to obey, `c` the sampling constant.
#[derive(Debug, Clone)]
pub struct PolymerModel {
    pub graph: Graph,
    pub q: usize,
    pub ground: Vec<Spin>,
    pub weight: PolymerWeight,
    pub theta: f64,
    pub c: f64,
}

/// Largest polymer size the weight verifier inspects.
pub const VERIFY_K_MAX: usize = 8;
const VERIFY_CAP: usize = 200_000;

impl PolymerModel {
    pub fn new(graph: Graph, q: usize, ground: Vec<Spin>, weight: PolymerWeight, theta: f64) -> Result<Self> {
        if q < 2 || ground.len() != graph.n() || ground.iter().any(|&g| g as usize >= q) {
            return Err(Error::InvalidParams("polymer model needs q >= 2 and a ground spin per vertex".into()));
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidParams("theta must be positive".into()));
        }
        Ok(PolymerModel { graph, q, ground, weight, theta, c: 10.0 })
    }

    pub fn geometric(graph: Graph, q: usize, theta: f64) -> Result<Self> {
        let n = graph.n();
        Self::new(graph, q, vec![0; n], PolymerWeight::Geometric { scale: 1.0 }, theta)
    }

    pub fn polymer_weight(&self, p: &Polymer) -> f64 {
        match &self.weight {
            PolymerWeight::Geometric { scale } => scale * (-self.theta * p.len() as f64).exp(),
            PolymerWeight::Custom(f) => f(p),
        }
    }

    fn log_branching(&self) -> f64 {
        (((self.q - 1) * self.graph.max_degree().max(1)) as f64).ln()
    }

    /// r = θ - 2 - log((q-1)Δ), the rate of the size cutoff.
    pub fn rate(&self) -> f64 {
        self.theta - 2.0 - self.log_branching()
    }

    /// θ ≥ C(1 + log((q-1)Δ)) plus a spot check of w_γ ≤ exp(-θ|γ|) on
    /// polymers up to size 8.
    pub fn check_condition(&self) -> Result<()> {
        let need = self.c * (1.0 + self.log_branching());
        if self.theta < need {
            return Err(Error::Regime(format!(
                "polymer sampling condition needs theta >= {need:.3}, got {}",
                self.theta
            )));
        }
        self.check_weights()
    }

    /// Spot check of the weight decay only.
    pub fn check_weights(&self) -> Result<()> {
        let mut seen = 0;
        for u in 0..self.graph.n() {
            for (p, w) in self.polymers_containing(u, VERIFY_K_MAX.min(self.graph.n())) {
                if w > (-self.theta * p.len() as f64).exp() * (1.0 + 1e-12) {
                    return Err(Error::Regime(format!("weight {w:e} of {p:?} exceeds exp(-theta|gamma|)")));
                }
                seen += 1;
                if seen > VERIFY_CAP {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// All polymers containing u of size ≤ k with their weights, ordered by
    /// size, then vertex set, then spins.
    pub fn polymers_containing(&self, u: usize, k: usize) -> Vec<(Polymer, f64)> {
        let mut sets = enumerate_connected_subgraphs(&self.graph, u, k);
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut out = Vec::new();
        for s in sets {
            self.for_each_assignment(&s, |p| {
                let w = self.polymer_weight(&p);
                out.push((p, w));
            });
        }
        out
    }

    fn for_each_assignment(&self, vertices: &[usize], mut f: impl FnMut(Polymer)) {
        let choices: Vec<Vec<Spin>> = vertices
            .iter()
            .map(|&v| (0..self.q as Spin).filter(|&c| c != self.ground[v]).collect())
            .collect();
        let mut idx = vec![0usize; vertices.len()];
        loop {
            let spins = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            f(Polymer { vertices: vertices.to_vec(), spins });
            let mut j = 0;
            loop {
                if j == idx.len() {
                    return;
                }
                idx[j] += 1;
                if idx[j] < choices[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// Weight of a full configuration: product over the non-ground connected
    /// components, each read as a polymer.
    pub fn configuration_weight(&self, sigma: &[Spin]) -> f64 {
        let n = self.graph.n();
        let mut seen = vec![false; n];
        let mut w = 1.0;
        for s in 0..n {
            if seen[s] || sigma[s] == self.ground[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &y in self.graph.neighbors(x) {
                    if !seen[y] && sigma[y] != self.ground[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            let spins = comp.iter().map(|&v| sigma[v]).collect();
            w *= self.polymer_weight(&Polymer { vertices: comp, spins });
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_polymers_with_assignments() {
        let m = PolymerModel::geometric(Graph::path(3), 3, 20.0).unwrap();
        let ps = m.polymers_containing(0, 2);
        // {0}: 2 assignments, {0,1}: 4 assignments
        assert_eq!(ps.len(), 6);
        assert!(ps.iter().all(|(p, _)| p.spins.iter().all(|&s| s != 0)));
    }

    #[test]
    fn condition_gate() {
        let m = PolymerModel::geometric(Graph::path(3), 2, 6.0).unwrap();
        assert!(m.check_condition().is_err());
        assert!(m.check_weights().is_ok());
        let m = PolymerModel::geometric(Graph::path(3), 2, 17.0).unwrap();
        assert!(m.check_condition().is_ok());
        let heavy = PolymerModel::new(
            Graph::path(3),
            2,
            vec![0; 3],
            PolymerWeight::Geometric { scale: 2.0 },
            17.0,
        )
        .unwrap();
        assert!(heavy.check_condition().is_err());
    }

    #[test]
    fn configuration_weight_splits_components() {
        let m = PolymerModel::geometric(Graph::path(3), 2, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((m.configuration_weight(&[1, 0, 1]) - e * e).abs() < 1e-15);
        assert!((m.configuration_weight(&[1, 1, 0]) - e * e).abs() < 1e-15);
        assert_eq!(m.configuration_weight(&[0, 0, 0]), 1.0);
    }
}
