//! Marginal sampler for spin systems with sufficiently weak interactions.

use crate::error::Result;
use crate::graph::Spin;
use crate::models::SpinSystem;
use crate::oracle::{pin_of, GraphOracle, Overlay, PinView};
use crate::rng::{sample_binomial, sample_index, BinomialOracle, RngStream};

use super::abstract_ms::{pin, Reveal, Scenario};
use super::{Budget, MarginalSampler};

/// Normalized interaction and field with the inclusion rate 1/(2Δ).
#[derive(Debug, Clone)]
pub struct WeakSpinScenario {
    pub q: usize,
    a: Vec<f64>,
    field: Vec<f64>,
    two_delta: f64,
}

impl WeakSpinScenario {
    /// `max_degree` is the Δ of the window 1 - 1/(2Δ) ≤ A ≤ 1; it must bound
    /// every degree the sampler will see.
    pub fn new(system: &SpinSystem, max_degree: usize, override_regime: bool) -> Result<Self> {
        if !override_regime {
            system.check_weak(max_degree)?;
        }
        let z: f64 = system.field.iter().sum();
        Ok(WeakSpinScenario {
            q: system.q,
            a: system.normalized_interaction(),
            field: system.field.iter().map(|&x| x / z).collect(),
            two_delta: 2.0 * max_degree.max(1) as f64,
        })
    }

    fn a(&self, x: Spin, y: Spin) -> f64 {
        self.a[x as usize * self.q + y as usize]
    }

    /// Per-neighbor survival 1 - 2Δ(1 - A(c, τ_v)); the product over S∖u is
    /// the acceptance probability of the field proposal c.
    fn accept(&self, c: Spin, revealed: &[Spin]) -> f64 {
        revealed
            .iter()
            .map(|&s| (1.0 - self.two_delta * (1.0 - self.a(c, s))).clamp(0.0, 1.0))
            .product()
    }

    fn accept_literal(&self, c: Spin, revealed: &[Spin]) -> f64 {
        revealed
            .iter()
            .map(|&s| (self.two_delta * (1.0 - self.a(c, s))).clamp(0.0, 1.0))
            .product()
    }

    fn pmf(&self, revealed: &[Spin], own: Spin, literal: bool) -> Vec<f64> {
        let mut pmf: Vec<f64> = (0..self.q as Spin)
            .map(|c| {
                let acc = if literal { self.accept_literal(c, revealed) } else { self.accept(c, revealed) };
                self.field[c as usize] * acc
            })
            .collect();
        let reject = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
        pmf[own as usize] += reject;
        pmf
    }
}

impl Scenario for WeakSpinScenario {
    type Proposal = ();

    fn num_spins(&self) -> usize {
        self.q
    }

    fn reveal<O: GraphOracle + ?Sized>(&self, oracle: &mut O, u: usize, _: &PinView, rng: &mut RngStream) -> Result<Reveal<()>> {
        let mut nbrs = Vec::new();
        oracle.neighbors(u, &mut nbrs);
        let p = 1.0 / self.two_delta;
        let mut set: Vec<usize> = nbrs.into_iter().filter(|_| rng.uniform() < p).collect();
        if !set.is_empty() {
            set.push(u);
        }
        Ok(Reveal { proposal: (), set })
    }

    fn reveal_batch<O: GraphOracle + ?Sized>(
        &self,
        oracle: &mut O,
        u: usize,
        _: &PinView,
        n: u64,
        rng: &mut RngStream,
        bin: &BinomialOracle,
    ) -> Result<Vec<(Reveal<()>, u64)>> {
        let mut nbrs = Vec::new();
        oracle.neighbors(u, &mut nbrs);
        let p = 1.0 / self.two_delta;
        // split the batch neighbor by neighbor: one binomial per occupied group
        let mut groups: Vec<(Vec<usize>, u64)> = vec![(vec![], n)];
        for &v in &nbrs {
            let mut next = Vec::with_capacity(groups.len() * 2);
            for (set, m) in groups {
                let x = sample_binomial(bin, m, p, rng)?;
                if x > 0 {
                    let mut s = set.clone();
                    s.push(v);
                    next.push((s, x));
                }
                if m - x > 0 {
                    next.push((set, m - x));
                }
            }
            groups = next;
        }
        Ok(groups
            .into_iter()
            .map(|(mut set, m)| {
                if !set.is_empty() {
                    set.push(u);
                }
                (Reveal { proposal: (), set }, m)
            })
            .collect())
    }

    fn continuation<O: GraphOracle + ?Sized>(&self, _: &mut O, _: usize, _: usize, _: &PinView, _: &Reveal<()>) -> u64 {
        if self.q == 64 {
            u64::MAX
        } else {
            (1u64 << self.q) - 1
        }
    }

    fn finalize_pmf<O: GraphOracle + ?Sized>(&self, oracle: &mut O, u: usize, tau: &PinView, rv: &Reveal<()>) -> Vec<f64> {
        if rv.set.is_empty() {
            return self.field.clone();
        }
        let revealed: Vec<Spin> = rv.set[..rv.set.len() - 1]
            .iter()
            .map(|&v| pin(oracle, tau, v).expect("revealed vertex"))
            .collect();
        let own = pin(oracle, tau, u).expect("u revealed last");
        self.pmf(&revealed, own, false)
    }
}

/// Standalone recursive sampler: reveal S, draw c from the field and accept
/// with the product of per-neighbor survivals, else keep the recursively
/// sampled spin of u.
pub fn mms_spin<O: GraphOracle + ?Sized>(
    sc: &WeakSpinScenario,
    oracle: &mut O,
    u: usize,
    overlay: &mut Overlay,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Spin> {
    run(sc, oracle, u, overlay, rng, budget, false)
}

/// The acceptance read as ∏ 2Δ(1 - A(c, τ_v)). Kept only so tests can show
/// that this reading does not reproduce the Gibbs marginals.
pub fn ms_spin_literal<O: GraphOracle + ?Sized>(
    sc: &WeakSpinScenario,
    oracle: &mut O,
    u: usize,
    overlay: &mut Overlay,
    rng: &mut RngStream,
    budget: &mut Budget,
) -> Result<Spin> {
    run(sc, oracle, u, overlay, rng, budget, true)
}

fn run<O: GraphOracle + ?Sized>(
    sc: &WeakSpinScenario,
    oracle: &mut O,
    u: usize,
    overlay: &mut Overlay,
    rng: &mut RngStream,
    budget: &mut Budget,
    literal: bool,
) -> Result<Spin> {
    if let Some(c) = pin_of(oracle, overlay, u) {
        return Ok(c);
    }
    budget.enter()?;
    let out = (|| {
        let mut nbrs = Vec::new();
        oracle.neighbors(u, &mut nbrs);
        let p = 1.0 / sc.two_delta;
        nbrs.retain(|_| rng.uniform() < p);
        if nbrs.is_empty() {
            return Ok(sample_index(&sc.field, rng) as Spin);
        }
        let mark = overlay.mark();
        let mut revealed = Vec::with_capacity(nbrs.len());
        for &v in &nbrs {
            let c = run(sc, oracle, v, overlay, rng, budget, literal)?;
            overlay.set(v, c);
            revealed.push(c);
        }
        let own = run(sc, oracle, u, overlay, rng, budget, literal)?;
        overlay.undo(mark);
        let c = sample_index(&sc.field, rng) as Spin;
        let acc = if literal { sc.accept_literal(c, &revealed) } else { sc.accept(c, &revealed) };
        Ok(if rng.uniform() < acc { c } else { own })
    })();
    budget.leave();
    out
}

#[derive(Debug, Clone)]
pub struct WeakSpinSampler {
    pub scenario: WeakSpinScenario,
}

impl MarginalSampler for WeakSpinSampler {
    fn sample(&self, oracle: &mut dyn GraphOracle, u: usize, rng: &mut RngStream, budget: &mut Budget) -> Result<Spin> {
        mms_spin(&self.scenario, oracle, u, &mut Overlay::new(), rng, budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Pinning};
    use crate::oracle::PinnedGraph;

    #[test]
    fn trivial_interaction_gives_field() {
        let g = Graph::cycle(5);
        let sys = SpinSystem::new(g.clone(), 3, vec![1.0; 9], vec![1.0, 2.0, 5.0]).unwrap();
        let sc = WeakSpinScenario::new(&sys, 2, false).unwrap();
        let pins = Pinning::new();
        let mut o = PinnedGraph::new(&g, &pins);
        let mut rng = RngStream::new(9);
        let n = 60_000;
        let mut c2 = 0;
        for _ in 0..n {
            if mms_spin(&sc, &mut o, 0, &mut Overlay::new(), &mut rng, &mut Budget::default()).unwrap() == 2 {
                c2 += 1;
            }
        }
        let p = 5.0 / 8.0;
        assert!((c2 as f64 / n as f64 - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn window_is_enforced() {
        let g = Graph::path(2);
        let sys = SpinSystem::new(g, 2, vec![0.5, 1.0, 1.0, 0.5], vec![1.0, 1.0]).unwrap();
        assert!(WeakSpinScenario::new(&sys, 3, false).is_err());
        assert!(WeakSpinScenario::new(&sys, 3, true).is_ok());
    }
}
