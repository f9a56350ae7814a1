use rayon::prelude::*;

use crate::aggregate::{aggregate_aj, aggregate_ms_abstract, automaton_batch, encode_aj_automaton, encode_hypergraph_automaton, AggregateStats, AjPhase, HyperPhase};
use crate::corpus::{hypergraph_instances, polymer_instances};
use crate::error::Result;
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{HyperIs, SpinSystem, TwoSpinParams};
use crate::oracle::{PinView, PinnedGraph};
use crate::rng::{BinomialOracle, RngStream};
use crate::samplers::{aj_sample, hypergraph_sample, ms_abstract, AjOptions, AjScenario, Budget, PolymerScenario, Scenario, WeakSpinScenario};
use crate::stats::{chi_square_two_sample, histogram, pooled_bins};

use super::{Check, VerifyConfig};

const LAMBDA: f64 = 0.3;

/// Compares `reps` batched counts with `reps` sums of `n` single draws.
fn compare(
    name: &str,
    cfg: &VerifyConfig,
    batched: impl Fn(&mut RngStream) -> Result<u64> + Sync,
    single: impl Fn(&mut RngStream) -> Result<Spin> + Sync,
) -> Result<Check> {
    let root = RngStream::new(cfg.seed).derive_str(name);
    let n = cfg.batch_n;
    let a: Vec<Result<u64>> = (0..cfg.batch_reps).into_par_iter().map(|r| batched(&mut root.derive_str("batch").derive(r as u64))).collect();
    let b: Vec<Result<u64>> = (0..cfg.batch_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = root.derive_str("single").derive(r as u64);
            let mut k = 0;
            for _ in 0..n {
                k += single(&mut rng)? as u64;
            }
            Ok(k)
        })
        .collect();
    let a = a.into_iter().collect::<Result<Vec<u64>>>()?;
    let b = b.into_iter().collect::<Result<Vec<u64>>>()?;
    let cuts = pooled_bins(&a, &b, 50);
    let t = chi_square_two_sample(&histogram(&a, &cuts), &histogram(&b, &cuts));
    let mean = |x: &[u64]| x.iter().sum::<u64>() as f64 / x.len() as f64;
    Ok(Check::new(
        "batch",
        name,
        t.passes(cfg.alpha),
        format!("chi2={:.2} dof={} p={:.3e}; means {:.2} vs {:.2} over {} reps of N={n}", t.stat, t.dof, t.p_value, mean(&a), mean(&b), cfg.batch_reps),
    ))
}

fn ms_pair<S: Scenario + Sync>(name: &str, cfg: &VerifyConfig, sc: &S, g: &Graph, one: usize) -> Result<Check> {
    let none = Pinning::new();
    compare(
        name,
        cfg,
        |rng| {
            let mut o = PinnedGraph::new(g, &none);
            let bin = BinomialOracle::new(cfg.batch_n);
            let f = aggregate_ms_abstract(sc, &mut o, 0, &PinView::new(), cfg.batch_n, rng, &bin, &mut Budget::default(), &mut AggregateStats::default())?;
            Ok(f[one])
        },
        |rng| {
            let mut o = PinnedGraph::new(g, &none);
            let c = ms_abstract(sc, &mut o, 0, &PinView::new(), rng, &mut Budget::default())?;
            Ok((c as usize == one) as Spin)
        },
    )
}

/// Batched samplers against repeated single draws of the sampler they batch.
pub fn batch(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let none = Pinning::new();
    let opts = AjOptions::default();
    let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
    let aj_graphs = [("C5", Graph::cycle(5)), ("K4", Graph::complete(4)), ("star", star)];
    let mut out = Vec::new();
    for (label, g) in &aj_graphs {
        out.push(compare(
            &format!("aggregate-aj/{label}"),
            cfg,
            |rng| Ok(aggregate_aj(g, LAMBDA, 0, &[], cfg.batch_n, rng, &BinomialOracle::new(cfg.batch_n), opts)?.0),
            |rng| aj_sample(g, LAMBDA, 0, &[], rng, opts),
        )?);
    }

    out.push(ms_pair("aggregate-ms/hardcore-C5", cfg, &AjScenario { lambda: LAMBDA }, &Graph::cycle(5), 1)?);
    let k4 = Graph::complete(4);
    let sys = SpinSystem::from_two_spin(k4.clone(), &TwoSpinParams::ising(0.85, 1.3))?;
    out.push(ms_pair("aggregate-ms/ising-K4", cfg, &WeakSpinScenario::new(&sys, 3, false)?, &k4, 1)?);
    let poly = polymer_instances().swap_remove(2);
    out.push(ms_pair("aggregate-ms/polymer-C5", cfg, &PolymerScenario::new(&poly, true)?, &poly.graph, 1)?);

    for (label, g) in &aj_graphs[..2] {
        let spec = encode_aj_automaton(g, LAMBDA, 0, none.clone());
        out.push(compare(
            &format!("automaton/hardcore-{label}"),
            cfg,
            |rng| {
                let r = automaton_batch(&spec, cfg.batch_n, rng, &BinomialOracle::new(cfg.batch_n))?;
                Ok(r.absorbed.iter().filter(|(s, _)| s[0].phase == AjPhase::Halt(1)).map(|(_, &c)| c).sum())
            },
            |rng| aj_sample(g, LAMBDA, 0, &[], rng, opts),
        )?);
    }
    let h = hypergraph_instances().swap_remove(0);
    let model = HyperIs::new(h.clone());
    let spec = encode_hypergraph_automaton(&h, 0);
    out.push(compare(
        "automaton/hyper-is",
        cfg,
        |rng| {
            let r = automaton_batch(&spec, cfg.batch_n, rng, &BinomialOracle::new(cfg.batch_n))?;
            Ok(r.absorbed.iter().filter(|(s, _)| s.stack[0].phase == HyperPhase::Done(1)).map(|(_, &c)| c).sum())
        },
        |rng| hypergraph_sample(&model, 0, &none, rng, true),
    )?);
    Ok(out)
}
