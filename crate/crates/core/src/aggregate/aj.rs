use crate::error::Result;
use crate::graph::{Graph, Pinning};
use crate::oracle::{pin_of, GraphOracle, Overlay, PinnedGraph};
use crate::rng::{sample_binomial, BinomialOracle, RngStream};
use crate::samplers::{aj_check_regime, AjOptions, Budget};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AggregateStats {
    /// Recursive calls that received a nonzero batch.
    pub calls: u64,
}

/// Number of 1-outcomes among N independent hardcore marginal samples of u
/// with `lambda_set` pinned unoccupied.
#[allow(clippy::too_many_arguments)]
pub fn aggregate_aj(
    g: &Graph,
    lambda: f64,
    u: usize,
    lambda_set: &[usize],
    n: u64,
    rng: &mut RngStream,
    oracle: &BinomialOracle,
    opts: AjOptions,
) -> Result<(u64, AggregateStats)> {
    if !opts.override_regime {
        aj_check_regime(lambda, g.max_degree())?;
    }
    let pins = Pinning::zeros(lambda_set);
    let mut o = PinnedGraph::new(g, &pins);
    let mut stats = AggregateStats::default();
    let mut budget = Budget::default();
    let x = aggregate_aj_oracle(&mut o, lambda, u, n, rng, oracle, &mut Overlay::new(), &mut budget, &mut stats)?;
    Ok((x, stats))
}

#[allow(clippy::too_many_arguments)]
pub fn aggregate_aj_oracle<O: GraphOracle + ?Sized>(
    g: &mut O,
    lambda: f64,
    u: usize,
    n: u64,
    rng: &mut RngStream,
    oracle: &BinomialOracle,
    lam: &mut Overlay,
    budget: &mut Budget,
    stats: &mut AggregateStats,
) -> Result<u64> {
    if n == 0 {
        return Ok(0);
    }
    if let Some(c) = pin_of(g, lam, u) {
        return Ok(c as u64 * n);
    }
    budget.enter()?;
    stats.calls += 1;
    let out = (|| {
        let mut x = sample_binomial(oracle, n, lambda / (1.0 + lambda), rng)?;
        let mut nbrs = Vec::new();
        g.neighbors(u, &mut nbrs);
        if nbrs.iter().any(|&v| pin_of(g, lam, v) == Some(1)) {
            return Ok(0);
        }
        let mark = lam.mark();
        for &v in &nbrs {
            if x == 0 {
                break;
            }
            if pin_of(g, lam, v).is_some() {
                continue;
            }
            let y = aggregate_aj_oracle(g, lambda, v, x, rng, oracle, lam, budget, stats)?;
            lam.set(v, 0);
            x -= y;
        }
        lam.undo(mark);
        Ok(x)
    })();
    budget.leave();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_batch() {
        let g = Graph::path(3);
        let mut rng = RngStream::new(1);
        let (x, s) = aggregate_aj(&g, 0.3, 0, &[], 0, &mut rng, &BinomialOracle::new(10), AjOptions::default()).unwrap();
        assert_eq!((x, s.calls), (0, 0));
    }

    #[test]
    fn counts_stay_in_range() {
        let g = Graph::cycle(6);
        let mut rng = RngStream::new(2);
        for _ in 0..200 {
            let (x, _) =
                aggregate_aj(&g, 0.5, 0, &[3], 1000, &mut rng, &BinomialOracle::new(1000), AjOptions::default()).unwrap();
            assert!(x <= 1000);
        }
    }
}
