use crate::error::{Error, Result};
use crate::graph::{Pinning, Spin};

use super::{two_spin_weight, HyperIs, PolymerModel, SpinSystem, TwoSpinModel};

pub const MAX_STATES: f64 = (1u64 << 26) as f64;

/// A model whose Gibbs weight can be evaluated on full configurations.
pub trait GibbsModel {
    fn num_vertices(&self) -> usize;
    fn num_spins(&self) -> usize;
    fn weight(&self, sigma: &[Spin]) -> f64;
}

impl GibbsModel for TwoSpinModel {
    fn num_vertices(&self) -> usize {
        self.graph.n()
    }
    fn num_spins(&self) -> usize {
        2
    }
    fn weight(&self, sigma: &[Spin]) -> f64 {
        two_spin_weight(&self.graph, &self.params, sigma)
    }
}

impl GibbsModel for SpinSystem {
    fn num_vertices(&self) -> usize {
        self.graph.n()
    }
    fn num_spins(&self) -> usize {
        self.q
    }
    fn weight(&self, sigma: &[Spin]) -> f64 {
        SpinSystem::weight(self, sigma)
    }
}

impl GibbsModel for PolymerModel {
    fn num_vertices(&self) -> usize {
        self.graph.n()
    }
    fn num_spins(&self) -> usize {
        self.q
    }
    fn weight(&self, sigma: &[Spin]) -> f64 {
        self.configuration_weight(sigma)
    }
}

impl GibbsModel for HyperIs {
    fn num_vertices(&self) -> usize {
        self.hypergraph.n()
    }
    fn num_spins(&self) -> usize {
        2
    }
    fn weight(&self, sigma: &[Spin]) -> f64 {
        HyperIs::weight(self, sigma)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Calls `f` on every configuration extending the pinning.
fn for_each_config<M: GibbsModel + ?Sized>(
    model: &M,
    pinning: &Pinning,
    mut f: impl FnMut(&[Spin], f64),
) -> Result<()> {
    let n = model.num_vertices();
    let q = model.num_spins();
    let free: Vec<usize> = (0..n).filter(|&v| pinning.get(v).is_none()).collect();
    let states = (q as f64).powi(free.len() as i32);
    if states > MAX_STATES {
        return Err(Error::TooLarge { states });
    }
    let mut sigma = vec![0 as Spin; n];
    for (v, c) in pinning.iter() {
        if v < n {
            sigma[v] = c;
        }
    }
    loop {
        let w = model.weight(&sigma);
        f(&sigma, w);
        let mut j = 0;
        loop {
            if j == free.len() {
                return Ok(());
            }
            let v = free[j];
            sigma[v] += 1;
            if (sigma[v] as usize) < q {
                break;
            }
            sigma[v] = 0;
            j += 1;
        }
    }
}

pub fn brute_force_partition<M: GibbsModel + ?Sized>(model: &M, pinning: &Pinning) -> Result<f64> {
    let mut z = KahanSum::default();
    for_each_config(model, pinning, |_, w| z.add(w))?;
    Ok(z.value())
}

/// Full marginal law of `v` under the pinning.
pub fn brute_force_marginals<M: GibbsModel + ?Sized>(model: &M, v: usize, pinning: &Pinning) -> Result<Vec<f64>> {
    let mut acc = vec![KahanSum::default(); model.num_spins()];
    for_each_config(model, pinning, |s, w| acc[s[v] as usize].add(w))?;
    let z: f64 = acc.iter().map(KahanSum::value).sum();
    if !(z > 0.0) {
        return Err(Error::Infeasible);
    }
    Ok(acc.iter().map(|a| a.value() / z).collect())
}

pub fn brute_force_marginal<M: GibbsModel + ?Sized>(model: &M, v: usize, c: Spin, pinning: &Pinning) -> Result<f64> {
    Ok(brute_force_marginals(model, v, pinning)?[c as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models::TwoSpinParams;

    fn hc(g: Graph, l: f64) -> TwoSpinModel {
        TwoSpinModel::new(g, TwoSpinParams::hardcore(l)).unwrap()
    }

    #[test]
    fn partition_functions() {
        let none = Pinning::new();
        assert_eq!(brute_force_partition(&hc(Graph::complete(3), 1.0), &none).unwrap(), 4.0);
        assert_eq!(brute_force_partition(&hc(Graph::path(3), 1.0), &none).unwrap(), 5.0);
        let ising = TwoSpinModel::new(Graph::path(2), TwoSpinParams::ising(2.0, 1.0)).unwrap();
        assert_eq!(brute_force_partition(&ising, &none).unwrap(), 6.0);
    }

    #[test]
    fn marginals() {
        let none = Pinning::new();
        let m = brute_force_marginal(&hc(Graph::path(2), 1.0), 0, 1, &none).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
        let iso = hc(Graph::from_edges(1, &[]).unwrap(), 0.7);
        let m = brute_force_marginal(&iso, 0, 1, &none).unwrap();
        assert!((m - 0.7 / 1.7).abs() < 1e-15);
        let center = Pinning::from_pairs([(1, 1)]);
        assert_eq!(brute_force_marginal(&hc(Graph::path(3), 1.0), 0, 1, &center).unwrap(), 0.0);
        let bad = Pinning::from_pairs([(0, 1), (1, 1)]);
        assert_eq!(brute_force_marginal(&hc(Graph::path(3), 1.0), 2, 1, &bad), Err(Error::Infeasible));
    }

    #[test]
    fn size_guard() {
        let big = hc(Graph::path(27), 1.0);
        assert!(matches!(brute_force_partition(&big, &Pinning::new()), Err(Error::TooLarge { .. })));
    }
}
