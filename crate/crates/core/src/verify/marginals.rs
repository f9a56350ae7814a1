use rayon::prelude::*;

use crate::corpus::{connected_graphs, hypergraph_instances, polymer_instances};
use crate::error::Result;
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{brute_force_marginals, HyperIs, SpinSystem, TwoSpinModel, TwoSpinParams};
use crate::oracle::{Overlay, PinView, PinnedGraph};
use crate::rng::RngStream;
use crate::samplers::{aj_sample, hypergraph_sample, mms_polymer, mms_spin, ms_abstract, AjOptions, AjScenario, Budget, WeakSpinScenario};
use crate::stats::chi_square_gof;

use super::{Check, VerifyConfig};

pub const HARDCORE_LAMBDA: f64 = 0.4;
pub const ISING_BETA: f64 = 0.85;
pub const ISING_LAMBDA: f64 = 1.3;

/// Runs `draw` `samples` times per instance and tests the histogram of the
/// returned spin against the exact law; one check per sampler family.
fn family<I: Sync>(
    name: &str,
    cfg: &VerifyConfig,
    instances: &[I],
    exact: impl Fn(&I) -> Result<Vec<f64>> + Sync,
    draw: impl Fn(&I, &mut RngStream) -> Result<Spin> + Sync,
) -> Result<Check> {
    let root = RngStream::new(cfg.seed).derive_str(name);
    let pvals: Vec<Result<f64>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| {
            let probs = exact(inst)?;
            let mut rng = root.derive(k as u64);
            let mut hist = vec![0u64; probs.len()];
            for _ in 0..cfg.samples {
                hist[draw(inst, &mut rng)? as usize] += 1;
            }
            Ok(chi_square_gof(&hist, &probs).p_value)
        })
        .collect();
    let pvals = pvals.into_iter().collect::<Result<Vec<f64>>>()?;
    let ok = pvals.iter().filter(|&&p| p >= cfg.alpha).count();
    let min = pvals.iter().cloned().fold(1.0, f64::min);
    Ok(Check::new(
        "marginals",
        name,
        ok == pvals.len(),
        format!("{ok}/{} instances at alpha={:e}, min p={min:.3e}, {} draws each", pvals.len(), cfg.alpha, cfg.samples),
    ))
}

fn spin_scenario(g: &Graph) -> Result<WeakSpinScenario> {
    let sys = SpinSystem::from_two_spin(g.clone(), &TwoSpinParams::ising(ISING_BETA, ISING_LAMBDA))?;
    WeakSpinScenario::new(&sys, 3, false)
}

/// Every perfect sampler against brute-force marginals of vertex 0.
pub fn marginals(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let graphs = connected_graphs(6, 3);
    let hc = TwoSpinParams::hardcore(HARDCORE_LAMBDA);
    let is = TwoSpinParams::ising(ISING_BETA, ISING_LAMBDA);
    let none = Pinning::new();
    let hc_exact = |g: &Graph| brute_force_marginals(&TwoSpinModel::new(g.clone(), hc)?, 0, &none);
    let is_exact = |g: &Graph| brute_force_marginals(&TwoSpinModel::new(g.clone(), is)?, 0, &none);
    let opts = AjOptions { override_regime: false, coin_skew: cfg.coin_skew };
    let skewed = HARDCORE_LAMBDA * (1.0 + cfg.coin_skew);
    let mut out = vec![
        family("hardcore/aj", cfg, &graphs, hc_exact, |g, rng| aj_sample(g, HARDCORE_LAMBDA, 0, &[], rng, opts))?,
        family("hardcore/ms-abstract", cfg, &graphs, hc_exact, |g, rng| {
            let mut o = PinnedGraph::new(g, &none);
            ms_abstract(&AjScenario { lambda: skewed }, &mut o, 0, &PinView::new(), rng, &mut Budget::default())
        })?,
        family("ising/mms-spin", cfg, &graphs, is_exact, |g, rng| {
            let sc = spin_scenario(g)?;
            let mut o = PinnedGraph::new(g, &none);
            mms_spin(&sc, &mut o, 0, &mut Overlay::new(), rng, &mut Budget::default())
        })?,
        family("ising/ms-abstract", cfg, &graphs, is_exact, |g, rng| {
            let sc = spin_scenario(g)?;
            let mut o = PinnedGraph::new(g, &none);
            ms_abstract(&sc, &mut o, 0, &PinView::new(), rng, &mut Budget::default())
        })?,
    ];
    let polymers = polymer_instances();
    out.push(family(
        "polymer/mms-polymer",
        cfg,
        &polymers,
        |m| brute_force_marginals(m, 0, &none),
        |m, rng| {
            let mut o = PinnedGraph::new(&m.graph, &none);
            mms_polymer(m, &mut o, 0, &mut Overlay::new(), rng, &mut Budget::default())
        },
    )?);
    let hypers: Vec<HyperIs> = hypergraph_instances().into_iter().map(HyperIs::new).collect();
    out.push(family(
        "hyper-is/resolve",
        cfg,
        &hypers,
        |m| brute_force_marginals(m, 0, &none),
        |m, rng| hypergraph_sample(m, 0, &none, rng, true),
    )?);
    Ok(out)
}
