//! Marginal sampler for polymer models.

use crate::error::{Error, Result};
use crate::graph::Spin;
use crate::models::{Polymer, PolymerModel};
use crate::oracle::{pin_of, GraphOracle, Overlay, PinView};
use crate::rng::{sample_polymer_multinomial, BinomialOracle, RngStream};

use super::abstract_ms::{pin, Reveal, Scenario};
use super::Budget;

/// One draw from ν_u; `None` is the empty proposal.
pub fn sample_polymer_nu(model: &PolymerModel, u: usize, rng: &mut RngStream) -> Result<Option<Polymer>> {
    let (polys, _) = sample_polymer_multinomial(model, u, 1, rng, &BinomialOracle::new(1))?;
    Ok(polys.into_iter().next().map(|(p, _)| p))
}

/// N⁺(γ) with u first, then the rest in ascending order.
fn closed_neighborhood<O: GraphOracle + ?Sized>(oracle: &mut O, u: usize, gamma: &Polymer) -> Vec<usize> {
    let mut all = Vec::new();
    let mut nbrs = Vec::new();
    for &x in &gamma.vertices {
        all.push(x);
        oracle.neighbors(x, &mut nbrs);
        all.extend_from_slice(&nbrs);
    }
    all.sort_unstable();
    all.dedup();
    all.retain(|&x| x != u);
    all.insert(0, u);
    all
}

fn check_pins_ground(model: &PolymerModel, v: usize, c: Spin) -> Result<()> {
    if model.ground[v] != c {
        return Err(Error::InvalidParams(format!("polymer pinnings must be to ground spins (vertex {v})")));
    }
    Ok(())
}

/// Returns the spin of u under the polymer Gibbs measure given τ, where τ
/// (oracle pins plus overlay) only pins vertices to their ground spins.
pub fn mms_polymer<O: GraphOracle + ?Sized>(
    model: &PolymerModel,
    oracle: &mut O,
    u: usize,
    overlay: &mut Overlay,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Spin> {
    if let Some(c) = pin_of(oracle, overlay, u) {
        return Ok(c);
    }
    budget.enter()?;
    let out = (|| {
        let g_u = model.ground[u];
        let Some(gamma) = sample_polymer_nu(model, u, rng)? else { return Ok(g_u) };
        for &x in &gamma.vertices {
            if let Some(c) = pin_of(oracle, overlay, x) {
                check_pins_ground(model, x, c)?;
                return Ok(g_u);
            }
        }
        let mark = overlay.mark();
        for v in closed_neighborhood(oracle, u, &gamma) {
            let c = mms_polymer(model, oracle, v, overlay, rng, budget)?;
            if c != model.ground[v] {
                overlay.undo(mark);
                return Ok(g_u);
            }
            overlay.set(v, c);
        }
        overlay.undo(mark);
        Ok(gamma.spin_of(u).expect("polymer contains u"))
    })();
    budget.leave();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolymerProposal {
    /// Empty proposal or one overlapping the pinning: returns g_u.
    Ground,
    Polymer(Polymer),
}

#[derive(Debug, Clone, Copy)]
pub struct PolymerScenario<'a> {
    pub model: &'a PolymerModel,
}

impl<'a> PolymerScenario<'a> {
    pub fn new(model: &'a PolymerModel, override_regime: bool) -> Result<Self> {
        if !override_regime {
            model.check_condition()?;
        }
        Ok(PolymerScenario { model })
    }

    fn classify<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        gamma: Option<Polymer>,
    ) -> Result<Reveal<PolymerProposal>> {
        let ground = Reveal { proposal: PolymerProposal::Ground, set: vec![] };
        let Some(gamma) = gamma else { return Ok(ground) };
        for &x in &gamma.vertices {
            if let Some(c) = pin(oracle, tau, x) {
                check_pins_ground(self.model, x, c)?;
                return Ok(ground);
            }
        }
        let set = closed_neighborhood(oracle, u, &gamma);
        Ok(Reveal { proposal: PolymerProposal::Polymer(gamma), set })
    }
}

impl Scenario for PolymerScenario<'_> {
    type Proposal = PolymerProposal;

    fn num_spins(&self) -> usize {
        self.model.q
    }

    fn reveal<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        rng: &mut RngStream,
    ) -> Result<Reveal<PolymerProposal>> {
        let gamma = sample_polymer_nu(self.model, u, rng)?;
        self.classify(oracle, u, tau, gamma)
    }

    fn reveal_batch<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        n: u64,
        rng: &mut RngStream,
        bin: &BinomialOracle,
    ) -> Result<Vec<(Reveal<PolymerProposal>, u64)>> {
        let (polys, empty) = sample_polymer_multinomial(self.model, u, n, rng, bin)?;
        let mut ground = empty;
        let mut out = Vec::new();
        for (p, m) in polys {
            let rv = self.classify(oracle, u, tau, Some(p))?;
            if rv.proposal == PolymerProposal::Ground {
                ground += m;
            } else {
                out.push((rv, m));
            }
        }
        if ground > 0 {
            out.insert(0, (Reveal { proposal: PolymerProposal::Ground, set: vec![] }, ground));
        }
        Ok(out)
    }

    fn continuation<O: GraphOracle + ?Sized>(
        &self,
        _: &mut O,
        _: usize,
        v: usize,
        _: &PinView,
        _: &Reveal<PolymerProposal>,
    ) -> u64 {
        1u64 << self.model.ground[v]
    }

    fn finalize_pmf<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        tau: &PinView,
        rv: &Reveal<PolymerProposal>,
    ) -> Vec<f64> {
        let mut pmf = vec![0.0; self.model.q];
        let spin = match &rv.proposal {
            PolymerProposal::Polymer(gamma)
                if rv.set.iter().all(|&v| pin(oracle, tau, v).map_or(true, |c| c == self.model.ground[v])) =>
            {
                gamma.spin_of(u).expect("polymer contains u")
            }
            _ => self.model.ground[u],
        };
        pmf[spin as usize] = 1.0;
        pmf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Pinning};
    use crate::models::PolymerWeight;
    use crate::oracle::PinnedGraph;

    #[test]
    fn pinned_u_is_returned() {
        let m = PolymerModel::geometric(Graph::path(3), 2, 6.0).unwrap();
        let pins = Pinning::from_pairs([(1, 0)]);
        let mut o = PinnedGraph::new(&m.graph, &pins);
        let mut rng = RngStream::new(2);
        let s = mms_polymer(&m, &mut o, 1, &mut Overlay::new(), &mut rng, &mut Budget::default()).unwrap();
        assert_eq!(s, 0);
    }

    #[test]
    fn single_vertex_base_case() {
        // one vertex, q = 2, w({u}) = w0: P(non-ground) = w0 / (1 + w0)
        let g = Graph::from_edges(1, &[]).unwrap();
        let theta = 3.0;
        let m = PolymerModel::new(g, 2, vec![0], PolymerWeight::Geometric { scale: 1.0 }, theta).unwrap();
        let w0 = (-theta as f64).exp();
        let pins = Pinning::new();
        let mut o = PinnedGraph::new(&m.graph, &pins);
        let mut rng = RngStream::new(4);
        let n = 200_000;
        let ones = (0..n)
            .filter(|_| mms_polymer(&m, &mut o, 0, &mut Overlay::new(), &mut rng, &mut Budget::default()).unwrap() == 1)
            .count();
        let p = w0 / (1.0 + w0);
        assert!((ones as f64 / n as f64 - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }
}
