//! Backward resolver for the systematic-scan dynamics on hypergraph
//! independent sets.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Hypergraph, Pinning, Spin};
use crate::models::HyperIs;
use rand::RngCore;

use crate::rng::RngStream;

use super::Budget;

/// Lazily revealed coins r_s and memoized values Y_s keyed by time s ≤ 0.
#[derive(Debug)]
pub struct ResolveContext<'a> {
    h: &'a Hypergraph,
    coins: HashMap<i64, Spin>,
    memo: HashMap<i64, Spin>,
    rng: RngStream,
    pub budget: Budget,
}

impl<'a> ResolveContext<'a> {
    pub fn new(h: &'a Hypergraph, rng: RngStream) -> Self {
        ResolveContext { h, coins: HashMap::new(), memo: HashMap::new(), rng, budget: Budget::default() }
    }

    pub fn n(&self) -> i64 {
        self.h.n() as i64
    }

    /// v_t = t mod n.
    pub fn vertex_at(&self, t: i64) -> usize {
        t.rem_euclid(self.n()) as usize
    }

    /// Largest t' ≤ t with t' ≡ u (mod n).
    pub fn prev(&self, u: usize, t: i64) -> i64 {
        t - (t - u as i64).rem_euclid(self.n())
    }

    pub fn coin(&mut self, s: i64) -> Spin {
        let rng = &mut self.rng;
        *self.coins.entry(s).or_insert_with(|| (rng.uniform() < 0.5) as Spin)
    }

    pub fn memo(&self, s: i64) -> Option<Spin> {
        self.memo.get(&s).copied()
    }

    pub fn revealed_coins(&self) -> usize {
        self.coins.len()
    }

    fn set_memo(&mut self, t: i64, y: Spin) -> Spin {
        let old = self.memo.insert(t, y);
        debug_assert!(old.map_or(true, |o| o == y), "memo entry rewritten");
        y
    }
}

pub fn hypergraph_resolve(ctx: &mut ResolveContext<'_>, t: i64) -> Result<Spin> {
    if let Some(y) = ctx.memo(t) {
        return Ok(y);
    }
    if ctx.coin(t) == 0 {
        return Ok(ctx.set_memo(t, 0));
    }
    ctx.budget.enter()?;
    let out = resolve_edges(ctx, t);
    ctx.budget.leave();
    let y = out?;
    Ok(ctx.set_memo(t, y))
}

fn resolve_edges(ctx: &mut ResolveContext<'_>, t: i64) -> Result<Spin> {
    let h = ctx.h;
    let v = ctx.vertex_at(t);
    for &ei in h.incident(v) {
        let others: Vec<i64> = h.edges()[ei].iter().filter(|&&u| u != v).map(|&u| ctx.prev(u, t)).collect();
        if !others.iter().all(|&s| ctx.coin(s) == 1) {
            continue;
        }
        let mut all_one = true;
        for &s in &others {
            if hypergraph_resolve(ctx, s)? == 0 {
                all_one = false;
                break;
            }
        }
        if all_one {
            return Ok(0);
        }
    }
    Ok(1)
}

/// Stationary marginal sample of vertex v given a pinning, resolved at
/// t = v - n on the conditioned hypergraph.
pub fn hypergraph_sample(
    model: &HyperIs,
    v: usize,
    pinning: &Pinning,
    rng: &mut RngStream,
    override_regime: bool,
) -> Result<Spin> {
    if !override_regime && !model.in_regime() {
        return Err(Error::Regime(format!(
            "hypergraph resolver needs 2^(k/2) >= sqrt(8e) k^2 Delta (k={}, Delta={})",
            model.hypergraph.k(),
            model.hypergraph.max_degree()
        )));
    }
    if let Some(c) = pinning.get(v) {
        return Ok(c);
    }
    let h = model.hypergraph.condition(pinning)?;
    let label = rng.next_u64();
    let mut ctx = ResolveContext::new(&h, rng.derive(label));
    hypergraph_resolve(&mut ctx, v as i64 - h.n() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_arithmetic() {
        let h = Hypergraph::new(5, 2, vec![vec![0, 1]]).unwrap();
        let ctx = ResolveContext::new(&h, RngStream::new(1));
        assert_eq!(ctx.vertex_at(-1), 4);
        assert_eq!(ctx.vertex_at(-5), 0);
        assert_eq!(ctx.prev(3, -1), -2);
        assert_eq!(ctx.prev(4, -1), -1);
        assert_eq!(ctx.prev(0, 0), 0);
    }

    #[test]
    fn zero_coin_and_isolated_vertex() {
        let h = Hypergraph::new(6, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let mut ones = 0;
        let n = 40_000;
        for s in 0..n {
            let mut ctx = ResolveContext::new(&h, RngStream::new(s));
            let t = 5 - 6;
            let y = hypergraph_resolve(&mut ctx, t).unwrap();
            if ctx.coin(t) == 0 {
                assert_eq!(y, 0);
            }
            ones += y as u64;
        }
        let p = ones as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn memo_is_stable_under_replay() {
        let h = Hypergraph::new(6, 4, vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5]]).unwrap();
        for s in 0..200 {
            let mut a = ResolveContext::new(&h, RngStream::new(s));
            let mut b = ResolveContext::new(&h, RngStream::new(s));
            let ya = hypergraph_resolve(&mut a, -4).unwrap();
            let again = hypergraph_resolve(&mut a, -4).unwrap();
            let yb = hypergraph_resolve(&mut b, -4).unwrap();
            assert_eq!(ya, again);
            assert_eq!(ya, yb);
        }
    }
}
