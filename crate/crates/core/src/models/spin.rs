use crate::error::{Error, Result};
use crate::graph::{Graph, Spin};

use super::TwoSpinParams;

/// q-spin system with one symmetric interaction matrix and a uniform field.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub graph: Graph,
    pub q: usize,
    /// Row-major q×q interaction matrix.
    pub interaction: Vec<f64>,
    pub field: Vec<f64>,
}

impl SpinSystem {
    pub fn new(graph: Graph, q: usize, interaction: Vec<f64>, field: Vec<f64>) -> Result<Self> {
        if q == 0 || q > 64 || interaction.len() != q * q || field.len() != q {
            return Err(Error::InvalidParams(format!("bad shapes for q={q}")));
        }
        for a in 0..q {
            for b in 0..q {
                if interaction[a * q + b] != interaction[b * q + a] {
                    return Err(Error::InvalidParams("interaction matrix must be symmetric".into()));
                }
            }
        }
        if interaction.iter().chain(&field).any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite and nonnegative".into()));
        }
        if field.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidParams("field is identically zero".into()));
        }
        Ok(SpinSystem { graph, q, interaction, field })
    }

    pub fn from_two_spin(graph: Graph, p: &TwoSpinParams) -> Result<Self> {
        p.validate()?;
        Self::new(graph, 2, vec![p.gamma, 1.0, 1.0, p.beta], vec![1.0, p.lambda])
    }

    pub fn a(&self, x: Spin, y: Spin) -> f64 {
        self.interaction[x as usize * self.q + y as usize]
    }

    /// Interaction rescaled so its largest entry is 1; marginals are unchanged.
    pub fn normalized_interaction(&self) -> Vec<f64> {
        let m = self.interaction.iter().cloned().fold(0.0, f64::max);
        self.interaction.iter().map(|&x| x / m).collect()
    }

    /// Checks 1 - 1/(2Δ) ≤ A(a,b) ≤ 1 after normalization.
    pub fn check_weak(&self, max_degree: usize) -> Result<()> {
        let lo = 1.0 - 1.0 / (2.0 * max_degree.max(1) as f64);
        let a = self.normalized_interaction();
        match a.iter().find(|&&x| x < lo - 1e-12) {
            Some(x) => Err(Error::Regime(format!(
                "interaction entry {x:.6} (normalized) below the weak window {lo:.6}"
            ))),
            None => Ok(()),
        }
    }

    pub fn weight(&self, sigma: &[Spin]) -> f64 {
        let mut w: f64 = sigma.iter().map(|&s| self.field[s as usize]).product();
        for (u, v) in self.graph.edges() {
            w *= self.a(sigma[u], sigma[v]);
        }
        w
    }
}
