use crate::error::Result;
use crate::oracle::{GraphOracle, PinView};
use crate::rng::{sample_multinomial_dense, BinomialOracle, RngStream};
use crate::samplers::{Budget, Scenario};

use super::{AggregateStats, FrequencyVector};

/// Histogram of N independent `ms_abstract` runs, simulated in one batch:
/// the reveal multinomial splits the batch by proposal, each proposal keeps
/// a query list of (pinning, count) branches, continuing spins spawn new
/// branches and early exits fold into the result through the finalize law.
#[allow(clippy::too_many_arguments)]
pub fn aggregate_ms_abstract<S: Scenario, O: GraphOracle + ?Sized>(
    scenario: &S,
    oracle: &mut O,
    u: usize,
    tau: &PinView,
    n: u64,
    rng: &mut RngStream,
    bin: &BinomialOracle,
    budget: &mut Budget,
    stats: &mut AggregateStats,
) -> Result<FrequencyVector> {
    let q = scenario.num_spins();
    let mut out = vec![0u64; q];
    if n == 0 {
        return Ok(out);
    }
    if let Some(c) = tau.get(u).or_else(|| oracle.pinning(u)) {
        out[c as usize] = n;
        return Ok(out);
    }
    budget.enter()?;
    stats.calls += 1;
    let res = (|| -> Result<FrequencyVector> {
        for (rv, qs) in scenario.reveal_batch(oracle, u, tau, n, rng, bin)? {
            if qs == 0 {
                continue;
            }
            let mut queries: Vec<(PinView, u64)> = vec![(tau.clone(), qs)];
            for &v in &rv.set {
                let mut next = Vec::new();
                for (ts, qstar) in queries {
                    let cont = scenario.continuation(oracle, u, v, &ts, &rv);
                    let r = aggregate_ms_abstract(scenario, oracle, v, &ts, qstar, rng, bin, budget, stats)?;
                    debug_assert_eq!(r.iter().sum::<u64>(), qstar);
                    for (c, &rc) in r.iter().enumerate() {
                        if rc == 0 {
                            continue;
                        }
                        let branch = ts.with(v, c as u8);
                        if cont >> c & 1 == 1 {
                            next.push((branch, rc));
                        } else {
                            let pmf = scenario.finalize_pmf(oracle, u, &branch, &rv);
                            add(&mut out, &finalize(&pmf, rc, rng, bin)?);
                        }
                    }
                }
                queries = next;
            }
            for (ts, qstar) in queries {
                let pmf = scenario.finalize_pmf(oracle, u, &ts, &rv);
                add(&mut out, &finalize(&pmf, qstar, rng, bin)?);
            }
        }
        Ok(out)
    })();
    budget.leave();
    let out = res?;
    debug_assert_eq!(out.iter().sum::<u64>(), n);
    Ok(out)
}

fn finalize(pmf: &[f64], m: u64, rng: &mut RngStream, bin: &BinomialOracle) -> Result<Vec<u64>> {
    let z: f64 = pmf.iter().sum();
    let probs: Vec<f64> = pmf.iter().map(|p| p / z).collect();
    sample_multinomial_dense(bin, m, &probs, rng)
}

fn add(acc: &mut [u64], x: &[u64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}
