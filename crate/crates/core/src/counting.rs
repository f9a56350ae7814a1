//! Counting through the chain rule: Z = w(σ*)/μ(σ*), with μ(σ*) a product of
//! conditional marginals estimated by SAW-tree or aggregate samplers.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::{aggregate_aj_oracle, aggregate_ms_abstract, automaton_batch, encode_hypergraph_automaton, AggregateStats, HyperPhase};
use crate::error::{Error, Result};
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{marginal_lower_bound, two_spin_weight, uniqueness_gap, GibbsModel, HyperIs, PolymerModel, SpinSystem, TwoSpinModel};
use crate::oracle::{Overlay, PinView, PinnedGraph};
use crate::rng::{BinomialOracle, RngStream};
use crate::samplers::{aj_check_regime, AjOptions, AjSampler, Budget, MarginalSampler, PolymerScenario, WeakSpinSampler, WeakSpinScenario};
use crate::saw::estimate_marginal_saw;

/// Repetitions per coordinate in the chain-rule reduction.
pub const REPETITIONS: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Saw,
    Aggregate,
}

#[derive(Debug, Clone)]
pub enum CountingModel {
    TwoSpin(TwoSpinModel),
    Polymer(PolymerModel),
    HyperIs(HyperIs),
}

impl CountingModel {
    pub fn n(&self) -> usize {
        self.num_vertices()
    }

    pub fn max_degree(&self) -> usize {
        match self {
            CountingModel::TwoSpin(m) => m.graph.max_degree(),
            CountingModel::Polymer(m) => m.graph.max_degree(),
            CountingModel::HyperIs(m) => m.hypergraph.max_degree(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CountingModel::TwoSpin(m) if m.params.is_hardcore() => "hardcore",
            CountingModel::TwoSpin(m) if m.params.beta == m.params.gamma => "ising",
            CountingModel::TwoSpin(_) => "two-spin",
            CountingModel::Polymer(_) => "polymer",
            CountingModel::HyperIs(_) => "hyper-is",
        }
    }

    /// All-ground reference configuration.
    pub fn ground(&self) -> Vec<Spin> {
        match self {
            CountingModel::Polymer(m) => m.ground.clone(),
            _ => vec![0; self.n()],
        }
    }

    /// Lower bound on the marginals the estimator divides by.
    pub fn marginal_bound(&self, mode: Mode) -> f64 {
        match (self, mode) {
            (CountingModel::TwoSpin(m), Mode::Saw) => marginal_lower_bound(&m.params, m.graph.max_degree()),
            (CountingModel::TwoSpin(m), Mode::Aggregate) if m.params.is_hardcore() => 1.0 / (1.0 + m.params.lambda),
            (CountingModel::TwoSpin(m), Mode::Aggregate) => marginal_lower_bound(&m.params, m.graph.max_degree()),
            _ => 0.5,
        }
    }
}

impl GibbsModel for CountingModel {
    fn num_vertices(&self) -> usize {
        match self {
            CountingModel::TwoSpin(m) => m.num_vertices(),
            CountingModel::Polymer(m) => m.num_vertices(),
            CountingModel::HyperIs(m) => m.num_vertices(),
        }
    }

    fn num_spins(&self) -> usize {
        match self {
            CountingModel::TwoSpin(m) => m.num_spins(),
            CountingModel::Polymer(m) => m.num_spins(),
            CountingModel::HyperIs(m) => m.num_spins(),
        }
    }

    fn weight(&self, sigma: &[Spin]) -> f64 {
        match self {
            CountingModel::TwoSpin(m) => two_spin_weight(&m.graph, &m.params, sigma),
            CountingModel::Polymer(m) => m.weight(sigma),
            CountingModel::HyperIs(m) => m.weight(sigma),
        }
    }
}

/// Tunable constants of the sample budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    /// Ĉ in N = Ĉ b⁻⁴ n log n / ε².
    pub saw: f64,
    /// c in N = c n / (ε² b²).
    pub aggregate: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration { saw: 1.0, aggregate: 16.0 }
    }
}

/// Samples per coordinate estimate. log n is floored at 1 so tiny graphs
/// still get a positive budget.
pub fn choose_sample_budget(b: f64, n: usize, epsilon: f64, mode: Mode, cal: &Calibration) -> u64 {
    let nf = n.max(1) as f64;
    let eps2 = epsilon * epsilon;
    let x = match mode {
        Mode::Saw => cal.saw * b.powi(-4) * nf * nf.ln().max(1.0) / eps2,
        Mode::Aggregate => cal.aggregate * nf / (eps2 * b * b),
    };
    x.ceil().max(1.0) as u64
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingTask {
    #[serde(skip)]
    pub model: CountingModel,
    pub sigma_star: Vec<Spin>,
    pub epsilon: f64,
    pub seed: u64,
}

impl CountingTask {
    pub fn new(model: CountingModel, epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParams("epsilon must be positive".into()));
        }
        let sigma_star = model.ground();
        if model.weight(&sigma_star) <= 0.0 {
            return Err(Error::Infeasible);
        }
        Ok(CountingTask { model, sigma_star, epsilon, seed })
    }

    /// Pinning σ*(<i).
    pub fn prefix(&self, i: usize) -> Pinning {
        Pinning::from_pairs((0..i).map(|j| (j, self.sigma_star[j])))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Work {
    /// Black-box frames (SAW mode) or recursive calls (aggregate mode).
    pub sampler_calls: u64,
    pub oracle_queries: u64,
}

impl Work {
    fn add(&mut self, o: &Work) {
        self.sampler_calls += o.sampler_calls;
        self.oracle_queries += o.oracle_queries;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEstimate {
    /// M = ∏ P_i.
    pub m: f64,
    pub log_m: f64,
    pub marginals: Vec<f64>,
    pub work: Work,
}

/// Runs the estimator `k` times per coordinate in order, averages to P_i and
/// multiplies. Repetitions run in parallel; results are reduced in
/// repetition order so the output does not depend on the thread count.
pub fn estimate_config_probability<F>(n: usize, k: usize, inference: F) -> Result<ConfigEstimate>
where
    F: Fn(usize, usize) -> Result<(f64, Work)> + Sync,
{
    let mut marginals = Vec::with_capacity(n);
    let mut work = Work::default();
    let mut log_m = 0.0;
    for i in 0..n {
        let reps: Vec<Result<(f64, Work)>> = (0..k).into_par_iter().map(|r| inference(i, r)).collect();
        let mut sum = 0.0;
        for r in reps {
            let (p, w) = r?;
            sum += p;
            work.add(&w);
        }
        let p = sum / k as f64;
        if p <= 0.0 {
            return Err(Error::ZeroEstimate(i));
        }
        log_m += p.ln();
        marginals.push(p);
    }
    Ok(ConfigEstimate { m: log_m.exp(), log_m, marginals, work })
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingOptions {
    pub mode: Mode,
    pub override_regime: bool,
    /// Gap for the boundary; computed from the parameters when absent.
    pub delta: Option<f64>,
    pub calibration: Calibration,
    /// Samples per coordinate estimate; chosen by the budget rule if absent.
    pub budget: Option<u64>,
    /// Target failure probability for median amplification; off if absent.
    pub amplify: Option<f64>,
    /// Fault injection forwarded to the hardcore coin.
    pub coin_skew: f64,
}

impl CountingOptions {
    pub fn new(mode: Mode) -> Self {
        CountingOptions {
            mode,
            override_regime: false,
            delta: None,
            calibration: Calibration::default(),
            budget: None,
            amplify: None,
            coin_skew: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub schema: u32,
    pub model: String,
    pub mode: Mode,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub delta: Option<f64>,
    pub budget: u64,
    pub repetitions: usize,
    pub z_hat: f64,
    pub log_z_hat: f64,
    pub sigma_star_weight: f64,
    pub marginals: Vec<f64>,
    /// Independent Ẑ values when amplification is on.
    pub amplified: Vec<f64>,
    pub work: Work,
    pub timing: Timing,
}

fn sampler_for(model: &TwoSpinModel, opts: &CountingOptions) -> Result<Box<dyn MarginalSampler>> {
    let d = model.graph.max_degree();
    if model.params.is_hardcore() {
        if !opts.override_regime {
            aj_check_regime(model.params.lambda, d)?;
        }
        let aj = AjOptions { override_regime: true, coin_skew: opts.coin_skew };
        Ok(Box::new(AjSampler { lambda: model.params.lambda, opts: aj }))
    } else {
        let sys = SpinSystem::from_two_spin(model.graph.clone(), &model.params)?;
        let scenario = WeakSpinScenario::new(&sys, d, opts.override_regime)?;
        Ok(Box::new(WeakSpinSampler { scenario }))
    }
}

/// Gap used by the boundary: the explicit one, else the uniqueness gap.
pub fn saw_delta(model: &TwoSpinModel, opts: &CountingOptions) -> Result<f64> {
    if let Some(d) = opts.delta {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParams(format!("delta {d} outside (0,1)")));
        }
        return Ok(d);
    }
    let rep = uniqueness_gap(&model.params, model.graph.max_degree().max(2))?;
    match rep.delta {
        Some(d) => Ok(d.min(0.99)),
        None if opts.override_regime => Ok(0.01),
        None => Err(Error::Regime(format!("parameters {:?} are not up-to-Delta unique", model.params))),
    }
}

/// Chain-rule estimate with the backend chosen by `opts.mode`.
pub fn fpras(task: &CountingTask, opts: &CountingOptions) -> Result<EstimateReport> {
    let start = Instant::now();
    let n = task.model.n();
    let b = task.model.marginal_bound(opts.mode);
    let budget = opts.budget.unwrap_or_else(|| choose_sample_budget(b, n, task.epsilon, opts.mode, &opts.calibration));
    let root = RngStream::new(task.seed);
    let mut delta = None;
    let run = |rng: &RngStream| -> Result<ConfigEstimate> {
        match (&task.model, opts.mode) {
            (CountingModel::TwoSpin(m), Mode::Saw) => {
                let sampler = sampler_for(m, opts)?;
                let d = saw_delta(m, opts)?;
                estimate_config_probability(n, REPETITIONS, |i, r| {
                    let mut rng = rng.derive(i as u64).derive(r as u64);
                    let tau = task.prefix(i);
                    let e = estimate_marginal_saw(&m.graph, i, &tau, &m.params, d, budget as f64, sampler.as_ref(), &mut rng)?;
                    let p = if task.sigma_star[i] == 1 { e.p } else { 1.0 - e.p };
                    Ok((p, Work { sampler_calls: e.sampler_frames, oracle_queries: e.oracle_queries }))
                })
            }
            (_, Mode::Saw) => Err(Error::InvalidParams("saw mode needs a two-spin model".into())),
            (model, Mode::Aggregate) => {
                let backend = AggregateBackend::new(model, opts)?;
                estimate_config_probability(n, REPETITIONS, |i, r| {
                    let mut rng = rng.derive(i as u64).derive(r as u64);
                    backend.frequency(task, i, budget, &mut rng)
                })
            }
        }
    };
    if let (CountingModel::TwoSpin(m), Mode::Saw) = (&task.model, opts.mode) {
        delta = Some(saw_delta(m, opts)?);
    }
    let w = task.model.weight(&task.sigma_star);
    let (est, amplified) = match opts.amplify {
        None => (run(&root)?, Vec::new()),
        Some(eta) => {
            let reps = 2 * (1.0 / eta).ln().ceil().max(0.0) as usize + 1;
            let mut all = Vec::with_capacity(reps);
            for j in 0..reps {
                all.push(run(&root.derive_str("amplify").derive(j as u64))?);
            }
            let zs: Vec<f64> = all.iter().map(|e| w / e.m).collect();
            let mut idx: Vec<usize> = (0..reps).collect();
            idx.sort_by(|&a, &b| all[a].log_m.total_cmp(&all[b].log_m));
            let mut work = Work::default();
            for e in &all {
                work.add(&e.work);
            }
            let mut med = all[idx[reps / 2]].clone();
            med.work = work;
            (med, zs)
        }
    };
    let log_z_hat = w.ln() - est.log_m;
    Ok(EstimateReport {
        schema: 1,
        model: task.model.name().into(),
        mode: opts.mode,
        n,
        epsilon: task.epsilon,
        seed: task.seed,
        delta,
        budget,
        repetitions: REPETITIONS,
        z_hat: log_z_hat.exp(),
        log_z_hat,
        sigma_star_weight: w,
        marginals: est.marginals,
        amplified,
        work: est.work,
        timing: Timing { wall_ms: start.elapsed().as_secs_f64() * 1e3 },
    })
}

enum AggregateBackend<'a> {
    Hardcore { graph: &'a Graph, lambda: f64 },
    Spin { graph: &'a Graph, scenario: WeakSpinScenario },
    Polymer { model: &'a PolymerModel },
    Hyper { model: &'a HyperIs },
}

impl<'a> AggregateBackend<'a> {
    fn new(model: &'a CountingModel, opts: &CountingOptions) -> Result<Self> {
        Ok(match model {
            CountingModel::TwoSpin(m) if m.params.is_hardcore() => {
                if !opts.override_regime {
                    aj_check_regime(m.params.lambda, m.graph.max_degree())?;
                }
                AggregateBackend::Hardcore { graph: &m.graph, lambda: m.params.lambda * (1.0 + opts.coin_skew) }
            }
            CountingModel::TwoSpin(m) => {
                let sys = SpinSystem::from_two_spin(m.graph.clone(), &m.params)?;
                let scenario = WeakSpinScenario::new(&sys, m.graph.max_degree(), opts.override_regime)?;
                AggregateBackend::Spin { graph: &m.graph, scenario }
            }
            CountingModel::Polymer(m) => {
                PolymerScenario::new(m, opts.override_regime)?;
                AggregateBackend::Polymer { model: m }
            }
            CountingModel::HyperIs(m) => {
                if !opts.override_regime && !m.in_regime() {
                    return Err(Error::Regime(format!(
                        "hypergraph resolver needs 2^(k/2) >= sqrt(8e) k^2 Delta (k={}, Delta={})",
                        m.hypergraph.k(),
                        m.hypergraph.max_degree()
                    )));
                }
                AggregateBackend::Hyper { model: m }
            }
        })
    }

    /// Fraction of `n_samples` batched draws of coordinate i, conditioned on
    /// σ*(<i), that agree with σ*_i.
    fn frequency(&self, task: &CountingTask, i: usize, n_samples: u64, rng: &mut RngStream) -> Result<(f64, Work)> {
        let pins = task.prefix(i);
        let target = task.sigma_star[i] as usize;
        let bin = BinomialOracle::new(n_samples.max(1));
        let mut stats = AggregateStats::default();
        let mut budget = Budget::default();
        let (hits, queries) = match self {
            AggregateBackend::Hardcore { graph, lambda } => {
                let mut o = PinnedGraph::new(graph, &pins);
                let ones = aggregate_aj_oracle(&mut o, *lambda, i, n_samples, rng, &bin, &mut Overlay::new(), &mut budget, &mut stats)?;
                let hits = if target == 1 { ones } else { n_samples - ones };
                (hits, o.queries)
            }
            AggregateBackend::Spin { graph, scenario } => {
                let mut o = PinnedGraph::new(graph, &pins);
                let f = aggregate_ms_abstract(scenario, &mut o, i, &PinView::new(), n_samples, rng, &bin, &mut budget, &mut stats)?;
                (f[target], o.queries)
            }
            AggregateBackend::Polymer { model } => {
                let sc = PolymerScenario { model };
                let mut o = PinnedGraph::new(&model.graph, &pins);
                let f = aggregate_ms_abstract(&sc, &mut o, i, &PinView::new(), n_samples, rng, &bin, &mut budget, &mut stats)?;
                (f[target], o.queries)
            }
            AggregateBackend::Hyper { model } => {
                let h = model.hypergraph.condition(&pins)?;
                let spec = encode_hypergraph_automaton(&h, i);
                let out = automaton_batch(&spec, n_samples, rng, &bin)?;
                let hits: u64 = out
                    .absorbed
                    .iter()
                    .filter(|(s, _)| s.stack[0].phase == HyperPhase::Done(target as Spin))
                    .map(|(_, &c)| c)
                    .sum();
                stats.calls = out.occupancy.iter().map(|&x| x as u64).sum();
                (hits, 0)
            }
        };
        Ok((hits as f64 / n_samples as f64, Work { sampler_calls: stats.calls, oracle_queries: queries }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{brute_force_marginal, brute_force_partition, TwoSpinParams};

    #[test]
    fn budget_formula() {
        let cal = Calibration::default();
        assert_eq!(choose_sample_budget(0.5, 64, 0.2, Mode::Aggregate, &cal), 102_400);
        let a = choose_sample_budget(0.3, 50, 0.1, Mode::Saw, &cal);
        let b = choose_sample_budget(0.3, 50, 0.2, Mode::Saw, &cal);
        assert!(b <= a);
    }

    fn exact(model: &CountingModel, task: &CountingTask) -> ConfigEstimate {
        estimate_config_probability(model.n(), 3, |i, _| {
            let p = brute_force_marginal(model, i, task.sigma_star[i], &task.prefix(i))?;
            Ok((p, Work::default()))
        })
        .unwrap()
    }

    #[test]
    fn exact_inference_recovers_mu() {
        let m = CountingModel::TwoSpin(TwoSpinModel::new(Graph::from_edges(1, &[]).unwrap(), TwoSpinParams::hardcore(1.0)).unwrap());
        let t = CountingTask::new(m.clone(), 0.1, 0).unwrap();
        assert!((exact(&m, &t).m - 0.5).abs() < 1e-15);
        let m = CountingModel::TwoSpin(TwoSpinModel::new(Graph::path(3), TwoSpinParams::hardcore(1.0)).unwrap());
        let t = CountingTask::new(m.clone(), 0.1, 0).unwrap();
        let e = exact(&m, &t);
        assert!((e.m - 0.2).abs() < 1e-12);
        let z = brute_force_partition(&m, &Pinning::new()).unwrap();
        assert!((1.0 / e.m - z).abs() < 1e-9 * z);
    }
}
