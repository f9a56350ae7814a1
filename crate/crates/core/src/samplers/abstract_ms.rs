//! The abstract marginal sampler and its hardcore encoding.

use std::fmt::Debug;

use crate::error::Result;
use crate::graph::Spin;
use crate::oracle::{GraphOracle, PinView};
use crate::rng::{sample_binomial, sample_index, BinomialOracle, RngStream};

use super::Budget;

/// A proposal token together with the ordered set S it reveals.
#[derive(Debug, Clone, PartialEq)]
pub struct Reveal<P> {
    pub proposal: P,
    pub set: Vec<usize>,
}

/// Effective pin: the view first, then the oracle.
pub(crate) fn pin<O: GraphOracle + ?Sized>(oracle: &mut O, tau: &PinView, v: usize) -> Option<Spin> {
    tau.get(v).or_else(|| oracle.pinning(v))
}

/// Reveal distribution ν, continuation sets 𝒞 and the finalize law. The
/// drivers short-circuit pinned vertices, so `u` is always unpinned here.
pub trait Scenario {
    type Proposal: Clone + Debug;

    fn num_spins(&self) -> usize;

    fn reveal<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        rng: &mut RngStream,
    ) -> Result<Reveal<Self::Proposal>>;

    /// (Q_S) ~ M(N; ν) as a sparse list; zero counts may be omitted.
    fn reveal_batch<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        n: u64,
        rng: &mut RngStream,
        bin: &BinomialOracle,
    ) -> Result<Vec<(Reveal<Self::Proposal>, u64)>>;

    /// 𝒞(u, v, τ) as a bitmask over spins.
    fn continuation<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        v: usize,
        tau: &PinView,
        reveal: &Reveal<Self::Proposal>,
    ) -> u64;

    /// Law of the returned spin given the accumulated pinning.
    fn finalize_pmf<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        reveal: &Reveal<Self::Proposal>,
    ) -> Vec<f64>;
}

pub fn ms_abstract<S: Scenario, O: GraphOracle + ?Sized>(
    scenario: &S,
    oracle: &mut O,
    u: usize,
    tau: &PinView,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Spin> {
    if let Some(c) = pin(oracle, tau, u) {
        return Ok(c);
    }
    budget.enter()?;
    let out = ms_body(scenario, oracle, u, tau, rng, budget);
    budget.leave();
    out
}

fn ms_body<S: Scenario, O: GraphOracle + ?Sized>(
    scenario: &S,
    oracle: &mut O,
    u: usize,
    tau: &PinView,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Spin> {
    let rv = scenario.reveal(oracle, u, tau, rng)?;
    let mut tau = tau.clone();
    for &v in &rv.set {
        let c = ms_abstract(scenario, oracle, v, &tau, rng, budget)?;
        let cont = scenario.continuation(oracle, u, v, &tau, &rv);
        tau = tau.with(v, c);
        if cont >> c & 1 == 0 {
            break;
        }
    }
    let pmf = scenario.finalize_pmf(oracle, u, &tau, &rv);
    Ok(sample_index(&pmf, rng) as Spin)
}

/// Hardcore as a scenario: with probability λ/(1+λ) reveal N(u) and keep
/// going while neighbors come back 0.
#[derive(Debug, Clone, Copy)]
pub struct AjScenario {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AjCoin {
    Unoccupied,
    Occupied,
}

impl Scenario for AjScenario {
    type Proposal = AjCoin;

    fn num_spins(&self) -> usize {
        2
    }

    fn reveal<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        _tau: &PinView,
        rng: &mut RngStream,
    ) -> Result<Reveal<AjCoin>> {
        if rng.uniform() < 1.0 / (1.0 + self.lambda) {
            return Ok(Reveal { proposal: AjCoin::Unoccupied, set: vec![] });
        }
        let mut set = Vec::new();
        oracle.neighbors(u, &mut set);
        Ok(Reveal { proposal: AjCoin::Occupied, set })
    }

    fn reveal_batch<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        _tau: &PinView,
        n: u64,
        rng: &mut RngStream,
        bin: &BinomialOracle,
    ) -> Result<Vec<(Reveal<AjCoin>, u64)>> {
        let x = sample_binomial(bin, n, self.lambda / (1.0 + self.lambda), rng)?;
        let mut set = Vec::new();
        oracle.neighbors(u, &mut set);
        Ok(vec![
            (Reveal { proposal: AjCoin::Unoccupied, set: vec![] }, n - x),
            (Reveal { proposal: AjCoin::Occupied, set }, x),
        ])
    }

    fn continuation<O: GraphOracle + ?Sized>(&self, _: &mut O, _: usize, _: usize, _: &PinView, _: &Reveal<AjCoin>) -> u64 {
        0b01
    }

    fn finalize_pmf<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        _u: usize,
        tau: &PinView,
        rv: &Reveal<AjCoin>,
    ) -> Vec<f64> {
        let blocked = rv.set.iter().any(|&v| pin(oracle, tau, v) == Some(1));
        if rv.proposal == AjCoin::Occupied && !blocked {
            vec![0.0, 1.0]
        } else {
            vec![1.0, 0.0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Pinning};
    use crate::oracle::PinnedGraph;

    /// ν ≡ ∅ with a fixed finalize law.
    struct Constant(Vec<f64>);

    impl Scenario for Constant {
        type Proposal = ();
        fn num_spins(&self) -> usize {
            self.0.len()
        }
        fn reveal<O: GraphOracle + ?Sized>(&self, _: &mut O, _: usize, _: &PinView, _: &mut RngStream) -> Result<Reveal<()>> {
            Ok(Reveal { proposal: (), set: vec![] })
        }
        fn reveal_batch<O: GraphOracle + ?Sized>(
            &self,
            _: &mut O,
            _: usize,
            _: &PinView,
            n: u64,
            _: &mut RngStream,
            _: &BinomialOracle,
        ) -> Result<Vec<(Reveal<()>, u64)>> {
            Ok(vec![(Reveal { proposal: (), set: vec![] }, n)])
        }
        fn continuation<O: GraphOracle + ?Sized>(&self, _: &mut O, _: usize, _: usize, _: &PinView, _: &Reveal<()>) -> u64 {
            u64::MAX
        }
        fn finalize_pmf<O: GraphOracle + ?Sized>(&self, _: &mut O, _: usize, _: &PinView, _: &Reveal<()>) -> Vec<f64> {
            self.0.clone()
        }
    }

    #[test]
    fn empty_reveal_returns_finalize_law() {
        let g = Graph::path(2);
        let pins = Pinning::new();
        let mut o = PinnedGraph::new(&g, &pins);
        let mut rng = RngStream::new(5);
        let sc = Constant(vec![0.2, 0.0, 0.8]);
        let n = 50_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[ms_abstract(&sc, &mut o, 0, &PinView::new(), &mut rng, &mut Budget::default()).unwrap() as usize] += 1;
        }
        assert_eq!(counts[1], 0);
        let p = counts[0] as f64 / n as f64;
        assert!((p - 0.2).abs() < 4.0 * (0.16f64 / n as f64).sqrt());
    }

    #[test]
    fn pinned_vertex_short_circuits() {
        let g = Graph::path(2);
        let pins = Pinning::from_pairs([(0, 1)]);
        let mut o = PinnedGraph::new(&g, &pins);
        let mut rng = RngStream::new(5);
        let s = ms_abstract(&AjScenario { lambda: 0.3 }, &mut o, 0, &PinView::new(), &mut rng, &mut Budget::default());
        assert_eq!(s.unwrap(), 1);
    }
}
