use serde::Serialize;

use crate::corpus::{connected_graphs, hypergraph_instances, polymer_instances};
use crate::counting::{estimate_config_probability, fpras, CountingModel, CountingOptions, CountingTask, Mode, Work};
use crate::error::Result;
use crate::graph::{Graph, Hypergraph, Pinning};
use crate::models::{brute_force_marginal, brute_force_partition, GibbsModel, HyperIs, TwoSpinModel, TwoSpinParams};
use crate::rng::RngStream;
use crate::stats::binomial_upper_tail;

use super::{rel_close, Check, VerifyConfig};

/// With exact conditional marginals plugged in, the reduction returns Z.
pub fn chain_rule(_cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut models = Vec::new();
    for g in connected_graphs(6, 3) {
        models.push(CountingModel::TwoSpin(TwoSpinModel::new(g.clone(), TwoSpinParams::hardcore(0.7))?));
        models.push(CountingModel::TwoSpin(TwoSpinModel::new(g, TwoSpinParams::ising(0.6, 1.3))?));
    }
    models.extend(polymer_instances().into_iter().map(CountingModel::Polymer));
    models.extend(hypergraph_instances().into_iter().map(|h| CountingModel::HyperIs(HyperIs::new(h))));
    let mut bad = Vec::new();
    for (k, m) in models.iter().enumerate() {
        let task = CountingTask::new(m.clone(), 0.1, 0)?;
        let est = estimate_config_probability(m.n(), 2, |i, _| {
            Ok((brute_force_marginal(m, i, task.sigma_star[i], &task.prefix(i))?, Work::default()))
        })?;
        let z_hat = m.weight(&task.sigma_star) / est.m;
        let z = brute_force_partition(m, &Pinning::new())?;
        if !rel_close(z_hat, z, 1e-9) {
            bad.push(format!("model {k} ({}): {z_hat} vs {z}", m.name()));
        }
    }
    Ok(vec![Check::new(
        "counting",
        "chain-rule-exactness",
        bad.is_empty(),
        bad.first().cloned().unwrap_or_else(|| format!("{} models, Z recovered to 1e-9", models.len())),
    )])
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageCase {
    pub name: String,
    #[serde(skip)]
    pub model: CountingModel,
    pub mode: Mode,
    pub override_regime: bool,
}

/// Brute-forceable instances for each driver mode.
pub fn default_cases() -> Vec<CoverageCase> {
    let k4 = Graph::complete(4);
    let cubic = cubic20();
    let two = |g: &Graph, p: TwoSpinParams| CountingModel::TwoSpin(TwoSpinModel::new(g.clone(), p).unwrap());
    vec![
        case("aggregate/hardcore-K3", two(&Graph::complete(3), TwoSpinParams::hardcore(1.0)), Mode::Aggregate, false),
        case("aggregate/ising-K4", two(&k4, TwoSpinParams::ising(1.1, 1.0)), Mode::Aggregate, false),
        case("aggregate/polymer-C5", CountingModel::Polymer(polymer_instances().swap_remove(2)), Mode::Aggregate, true),
        case(
            "aggregate/hyper-is-6",
            CountingModel::HyperIs(HyperIs::new(Hypergraph::new(6, 4, vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5], vec![0, 1, 4, 5]]).unwrap())),
            Mode::Aggregate,
            true,
        ),
        case("saw/hardcore-K3", two(&Graph::complete(3), TwoSpinParams::hardcore(1.0)), Mode::Saw, false),
        case("saw/hardcore-cubic20", two(&cubic, TwoSpinParams::hardcore(0.25)), Mode::Saw, false),
        case("saw/ising-cubic20", two(&cubic, TwoSpinParams::ising(0.85, 1.0)), Mode::Saw, false),
    ]
}

/// Heavier instances: the cube at both ends of the weak-spin window and a
/// Petersen-type graph for the hardcore aggregate sampler.
pub fn extended_cases() -> Vec<CoverageCase> {
    let cube = Graph::from_edges(
        8,
        &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)],
    )
    .unwrap();
    let petersen_like = Graph::from_edges(
        10,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)],
    )
    .unwrap();
    let two = |g: &Graph, p: TwoSpinParams| CountingModel::TwoSpin(TwoSpinModel::new(g.clone(), p).unwrap());
    let sixth = 1.0 / 6.0;
    vec![
        case("aggregate/hardcore-petersen", two(&petersen_like, TwoSpinParams::hardcore(0.4)), Mode::Aggregate, false),
        case("aggregate/ising-cube-anti", two(&cube, TwoSpinParams::ising(1.0 - sixth, 1.0)), Mode::Aggregate, false),
        case("aggregate/ising-cube-ferro", two(&cube, TwoSpinParams::ising(1.0 + sixth, 1.0)), Mode::Aggregate, false),
    ]
}

fn case(name: &str, model: CountingModel, mode: Mode, override_regime: bool) -> CoverageCase {
    CoverageCase { name: name.into(), model, mode, override_regime }
}

/// Fixed random cubic graph on 20 vertices, small enough to brute-force.
pub fn cubic20() -> Graph {
    Graph::random_regular(20, 3, &mut RngStream::new(20)).expect("cubic graph on 20 vertices")
}

/// Fraction of FPRAS runs within e^{±ε} of the exact Z. Passes when the
/// success count is at least 0.7 of the trials.
pub fn coverage(cfg: &VerifyConfig, cases: &[CoverageCase]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for c in cases {
        let z = brute_force_partition(&c.model, &Pinning::new())?;
        let mut opts = CountingOptions::new(c.mode);
        opts.override_regime = c.override_regime;
        opts.coin_skew = cfg.coin_skew;
        let mut hits = 0;
        for t in 0..cfg.trials {
            let task = CountingTask::new(c.model.clone(), cfg.epsilon, cfg.seed.wrapping_mul(1_000_003).wrapping_add(t as u64))?;
            let r = fpras(&task, &opts)?;
            if (r.log_z_hat - z.ln()).abs() <= cfg.epsilon {
                hits += 1;
            }
        }
        let need = (0.7 * cfg.trials as f64).ceil() as usize;
        let tail = binomial_upper_tail(cfg.trials as u64, 0.75, hits as u64);
        out.push(Check::new(
            "coverage",
            &c.name,
            hits >= need,
            format!("{hits}/{} within e^(+-{}) of Z={z:.6} (need {need}; P[Bin(n,3/4) >= hits]={tail:.3})", cfg.trials, cfg.epsilon),
        ));
    }
    Ok(out)
}
