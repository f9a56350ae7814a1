//! Anand–Jerrum perfect marginal sampler for the hardcore model.

use crate::error::{Error, Result};
use crate::graph::{Graph, Pinning, Spin};
use crate::oracle::{pin_of, GraphOracle, Overlay, PinnedGraph};
use crate::rng::RngStream;

use super::{Budget, MarginalSampler};

#[derive(Debug, Clone, Copy, Default)]
pub struct AjOptions {
    pub override_regime: bool,
    /// Fault injection for the verification harness: the occupation coin
    /// uses fugacity λ(1 + skew). Zero in normal use.
    pub coin_skew: f64,
}

/// λ ≤ 1/(Δ-1): the recursion is a branching process with mean offspring at
/// most 1. The critical point itself is admitted.
pub fn aj_check_regime(lambda: f64, max_degree: usize) -> Result<()> {
    if max_degree >= 2 && lambda * (max_degree as f64 - 1.0) > 1.0 + 1e-12 {
        return Err(Error::Regime(format!(
            "hardcore sampler needs lambda <= 1/(Delta-1) = {:.6}, got {lambda}",
            1.0 / (max_degree as f64 - 1.0)
        )));
    }
    Ok(())
}

/// Sample σ_u under the hardcore measure with `lambda_set` pinned unoccupied.
pub fn aj_sample(
    g: &Graph,
    lambda: f64,
    u: usize,
    lambda_set: &[usize],
    rng: &mut RngStream,
    opts: AjOptions,
) -> Result<Spin> {
    if !opts.override_regime {
        aj_check_regime(lambda, g.max_degree())?;
    }
    let pins = Pinning::zeros(lambda_set);
    let mut oracle = PinnedGraph::new(g, &pins);
    aj_sample_oracle(&mut oracle, lambda, u, rng, opts, &mut Budget::default(), None)
}

struct Frame {
    nbrs: Vec<usize>,
    idx: usize,
    mark: usize,
}

enum Entered {
    Done(Spin),
    Pushed,
}

/// Explicit-stack form of the recursion. Pins of the oracle are honoured:
/// 0-pins belong to Λ and a neighbor pinned to 1 forces 0. `trace`, when
/// given, records (vertex, coin) for every coin flip in call order.
pub fn aj_sample_oracle<O: GraphOracle + ?Sized>(
    oracle: &mut O,
    lambda: f64,
    u: usize,
    rng: &mut RngStream,
    opts: AjOptions,
    budget: &mut Budget,
    mut trace: Option<&mut Vec<(usize, bool)>>,
) -> Result<Spin> {
    if let Some(c) = oracle.pinning(u) {
        return Ok(c);
    }
    let p_zero = 1.0 / (1.0 + lambda * (1.0 + opts.coin_skew));
    let mut overlay = Overlay::new();
    let mut stack: Vec<Frame> = Vec::new();

    let mut enter = |x: usize,
                     oracle: &mut O,
                     overlay: &Overlay,
                     stack: &mut Vec<Frame>,
                     rng: &mut RngStream,
                     trace: &mut Option<&mut Vec<(usize, bool)>>|
     -> Result<Entered> {
        budget.tick()?;
        let occupied = rng.uniform() >= p_zero;
        if let Some(t) = trace.as_deref_mut() {
            t.push((x, occupied));
        }
        if !occupied {
            return Ok(Entered::Done(0));
        }
        let mut nbrs = Vec::new();
        oracle.neighbors(x, &mut nbrs);
        for &v in &nbrs {
            if pin_of(oracle, overlay, v) == Some(1) {
                return Ok(Entered::Done(0));
            }
        }
        stack.push(Frame { nbrs, idx: 0, mark: overlay.mark() });
        Ok(Entered::Pushed)
    };

    let mut result = match enter(u, oracle, &overlay, &mut stack, rng, &mut trace)? {
        Entered::Done(c) => return Ok(c),
        Entered::Pushed => None::<Spin>,
    };
    loop {
        if let Some(c) = result.take() {
            // deliver child's result to the frame on top of the stack
            let Some(top) = stack.last_mut() else { return Ok(c) };
            if c == 1 {
                let f = stack.pop().unwrap();
                overlay.undo(f.mark);
                result = Some(0);
                continue;
            }
            let v = top.nbrs[top.idx];
            overlay.set(v, 0);
            top.idx += 1;
        }
        let top = stack.last_mut().unwrap();
        while top.idx < top.nbrs.len() && pin_of(oracle, &overlay, top.nbrs[top.idx]).is_some() {
            top.idx += 1;
        }
        if top.idx == top.nbrs.len() {
            let f = stack.pop().unwrap();
            overlay.undo(f.mark);
            if stack.is_empty() {
                return Ok(1);
            }
            result = Some(1);
            continue;
        }
        let v = top.nbrs[top.idx];
        if let Entered::Done(c) = enter(v, oracle, &overlay, &mut stack, rng, &mut trace)? {
            result = Some(c);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AjSampler {
    pub lambda: f64,
    pub opts: AjOptions,
}

impl MarginalSampler for AjSampler {
    fn sample(&self, oracle: &mut dyn GraphOracle, u: usize, rng: &mut RngStream, budget: &mut Budget) -> Result<Spin> {
        aj_sample_oracle(oracle, self.lambda, u, rng, self.opts, budget, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(g: &Graph, lambda: f64, u: usize, set: &[usize], n: usize) -> f64 {
        let mut rng = RngStream::new(11);
        let opts = AjOptions { override_regime: true, ..Default::default() };
        (0..n).map(|_| aj_sample(g, lambda, u, set, &mut rng, opts).unwrap() as f64).sum::<f64>() / n as f64
    }

    #[test]
    fn isolated_vertex_is_fair_coin() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let m = mean(&g, 1.0, 0, &[], 100_000);
        assert!((m - 0.5).abs() < 4.0 * (0.25f64 / 1e5).sqrt());
    }

    #[test]
    fn blocked_neighbors_give_plain_coin() {
        let g = Graph::complete(4);
        let m = mean(&g, 0.3, 0, &[1, 2, 3], 100_000);
        let p = 0.3 / 1.3;
        assert!((m - p).abs() < 4.0 * (p * (1.0 - p) / 1e5).sqrt());
    }

    #[test]
    fn single_edge_marginal() {
        let g = Graph::path(2);
        let m = mean(&g, 0.4, 0, &[], 100_000);
        let p = 0.4 / 1.8;
        assert!((m - p).abs() < 4.0 * (p * (1.0 - p) / 1e5).sqrt());
    }

    #[test]
    fn regime_gate_and_budget() {
        let g = Graph::complete(3);
        let mut rng = RngStream::new(1);
        assert!(matches!(aj_sample(&g, 1.01, 0, &[], &mut rng, AjOptions::default()), Err(Error::Regime(_))));
        assert!(aj_sample(&g, 1.0, 0, &[], &mut rng, AjOptions::default()).is_ok());
        let big = Graph::complete(40);
        let mut oracle_pins = Pinning::new();
        oracle_pins.set(39, 0);
        let mut o = PinnedGraph::new(&big, &oracle_pins);
        let mut hit = false;
        for _ in 0..50 {
            let r = aj_sample_oracle(&mut o, 50.0, 0, &mut rng, AjOptions::default(), &mut Budget::new(100), None);
            hit |= matches!(r, Err(Error::RecursionBudget { .. }));
        }
        assert!(hit);
    }

    #[test]
    fn pinned_one_neighbor_forces_zero() {
        let g = Graph::path(3);
        let pins = Pinning::from_pairs([(1, 1)]);
        let mut o = PinnedGraph::new(&g, &pins);
        let mut rng = RngStream::new(3);
        for _ in 0..1000 {
            let s = aj_sample_oracle(&mut o, 0.9, 0, &mut rng, AjOptions::default(), &mut Budget::default(), None);
            assert_eq!(s.unwrap(), 0);
        }
    }
}
