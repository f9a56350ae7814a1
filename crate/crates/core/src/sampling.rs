//! Repeated draws of one vertex's spin, dispatched on the model family.

use serde::Serialize;

use crate::aggregate::{aggregate_aj, aggregate_ms_abstract, automaton_batch, encode_hypergraph_automaton, AggregateStats, HyperPhase};
use crate::counting::CountingModel;
use crate::error::{Error, Result};
use crate::graph::Pinning;
use crate::models::{GibbsModel, SpinSystem};
use crate::oracle::{Overlay, PinView, PinnedGraph};
use crate::rng::{BinomialOracle, RngStream};
use crate::samplers::{aj_sample, hypergraph_sample, mms_polymer, mms_spin, AjOptions, Budget, PolymerScenario, WeakSpinScenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinCounts {
    /// Draws per spin value.
    pub counts: Vec<u64>,
    /// Recursive calls of the batched sampler; zero for single draws.
    pub batch_calls: u64,
}

/// `trials` perfect draws of the spin at `u` under `pins`, either one at a
/// time or as a single aggregate batch.
pub fn sample_spin_counts(
    model: &CountingModel,
    u: usize,
    pins: &Pinning,
    trials: u64,
    batch: bool,
    override_regime: bool,
    rng: &mut RngStream,
) -> Result<SpinCounts> {
    let n = model.n();
    if u >= n || pins.iter().any(|(v, _)| v >= n) {
        return Err(Error::InvalidParams(format!("vertex out of range 0..{n}")));
    }
    let q = model.num_spins();
    let mut counts = vec![0u64; q];
    if let Some(c) = pins.get(u) {
        counts[c as usize] = trials;
        return Ok(SpinCounts { counts, batch_calls: 0 });
    }
    let bin = BinomialOracle::new(trials.max(1));
    let mut stats = AggregateStats::default();
    match model {
        CountingModel::TwoSpin(m) if m.params.is_hardcore() => {
            // an occupied pin blocks its neighbours, which leaves only 0-pins
            let mut zeros: Vec<usize> = Vec::new();
            for (v, c) in pins.iter() {
                zeros.push(v);
                if c == 1 {
                    for &w in m.graph.neighbors(v) {
                        if pins.get(w) == Some(1) {
                            return Err(Error::InvalidParams(format!("adjacent occupied pins {v} and {w}")));
                        }
                        zeros.push(w);
                    }
                }
            }
            zeros.sort_unstable();
            zeros.dedup();
            let opts = AjOptions { override_regime, coin_skew: 0.0 };
            if zeros.binary_search(&u).is_ok() {
                counts[0] = trials;
            } else if batch {
                let (ones, st) = aggregate_aj(&m.graph, m.params.lambda, u, &zeros, trials, rng, &bin, opts)?;
                counts = vec![trials - ones, ones];
                stats = st;
            } else {
                for _ in 0..trials {
                    counts[aj_sample(&m.graph, m.params.lambda, u, &zeros, rng, opts)? as usize] += 1;
                }
            }
        }
        CountingModel::TwoSpin(m) => {
            let sys = SpinSystem::from_two_spin(m.graph.clone(), &m.params)?;
            let sc = WeakSpinScenario::new(&sys, m.graph.max_degree(), override_regime)?;
            let mut o = PinnedGraph::new(&m.graph, pins);
            if batch {
                counts = aggregate_ms_abstract(&sc, &mut o, u, &PinView::new(), trials, rng, &bin, &mut Budget::default(), &mut stats)?;
            } else {
                for _ in 0..trials {
                    counts[mms_spin(&sc, &mut o, u, &mut Overlay::new(), rng, &mut Budget::default())? as usize] += 1;
                }
            }
        }
        CountingModel::Polymer(m) => {
            let sc = PolymerScenario::new(m, override_regime)?;
            let mut o = PinnedGraph::new(&m.graph, pins);
            if batch {
                counts = aggregate_ms_abstract(&sc, &mut o, u, &PinView::new(), trials, rng, &bin, &mut Budget::default(), &mut stats)?;
            } else {
                for _ in 0..trials {
                    counts[mms_polymer(m, &mut o, u, &mut Overlay::new(), rng, &mut Budget::default())? as usize] += 1;
                }
            }
        }
        CountingModel::HyperIs(m) => {
            if !override_regime && !m.in_regime() {
                return Err(Error::Regime("hypergraph resolver needs 2^(k/2) >= sqrt(8e) k^2 D".into()));
            }
            if batch {
                let h = m.hypergraph.condition(pins)?;
                let out = automaton_batch(&encode_hypergraph_automaton(&h, u), trials, rng, &bin)?;
                for (s, c) in &out.absorbed {
                    if let HyperPhase::Done(y) = s.stack[0].phase {
                        counts[y as usize] += c;
                    }
                }
                stats.calls = out.occupancy.iter().map(|&x| x as u64).sum();
            } else {
                for _ in 0..trials {
                    counts[hypergraph_sample(m, u, pins, rng, true)? as usize] += 1;
                }
            }
        }
    }
    Ok(SpinCounts { counts, batch_calls: stats.calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models::{TwoSpinModel, TwoSpinParams};

    #[test]
    fn occupied_pin_blocks_neighbour() {
        let m = CountingModel::TwoSpin(TwoSpinModel::new(Graph::path(3), TwoSpinParams::hardcore(0.5)).unwrap());
        let mut pins = Pinning::new();
        pins.set(0, 1);
        let r = sample_spin_counts(&m, 1, &pins, 50, false, false, &mut RngStream::new(1)).unwrap();
        assert_eq!(r.counts, vec![50, 0]);
        let r = sample_spin_counts(&m, 0, &pins, 50, true, false, &mut RngStream::new(1)).unwrap();
        assert_eq!(r.counts, vec![0, 50]);
    }

    #[test]
    fn batch_and_single_sum_to_trials() {
        let m = CountingModel::TwoSpin(TwoSpinModel::new(Graph::cycle(5), TwoSpinParams::ising(0.9, 1.0)).unwrap());
        for batch in [false, true] {
            let r = sample_spin_counts(&m, 2, &Pinning::new(), 300, batch, false, &mut RngStream::new(4)).unwrap();
            assert_eq!(r.counts.iter().sum::<u64>(), 300);
        }
    }
}
