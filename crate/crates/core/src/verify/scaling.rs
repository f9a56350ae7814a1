//! Work measurements against problem size, fitted on log-log axes.

use std::time::Instant;

use serde::Serialize;

use crate::aggregate::aggregate_aj;
use crate::counting::{choose_sample_budget, saw_delta, Calibration, CountingModel, CountingOptions, Mode, REPETITIONS};
use crate::error::Result;
use crate::graph::{Graph, Pinning};
use crate::models::{TwoSpinModel, TwoSpinParams};
use crate::rng::{BinomialOracle, RngStream};
use crate::samplers::{AjOptions, AjSampler};
use crate::saw::{boundary_exponent, estimate_marginal_saw};
use crate::stats::{log_log_slope, mean_var};

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub size: u64,
    /// Median over repeats.
    pub calls: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub mode: &'static str,
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    /// Largest slope the theory allows at these parameters, plus slack.
    pub bound: f64,
}

impl ScalingReport {
    pub fn within_bound(&self) -> bool {
        self.slope <= self.bound
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,mode,calls,wall_ms\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:.3}\n", r.size, self.mode, r.calls, r.wall_ms));
        }
        s.push_str(&format!("# slope {:.4} bound {:.4}\n", self.slope, self.bound));
        s
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn report(mode: &'static str, rows: Vec<ScalingRow>, bound: f64) -> ScalingReport {
    let slope = log_log_slope(&rows.iter().map(|r| (r.size as f64, r.calls.max(1.0))).collect::<Vec<_>>());
    ScalingReport { mode, rows, slope, bound }
}

/// Recursive calls of the batched hardcore sampler on a random Δ-regular
/// graph, for batch sizes N = 2^e. The default fugacity puts the occupation
/// probability λ/(1+λ) at 1/(2Δ).
pub fn aggregate_aj_scaling(exps: &[u32], degree: usize, lambda: Option<f64>, repeat: usize, seed: u64) -> Result<ScalingReport> {
    let lambda = lambda.unwrap_or(1.0 / (2.0 * degree as f64 - 1.0));
    let g = Graph::random_regular(4096, degree, &mut RngStream::new(seed).derive_str("graph"))?;
    let opts = AjOptions { override_regime: true, coin_skew: 0.0 };
    let mut rows = Vec::new();
    for &e in exps {
        let n = 1u64 << e;
        let (mut calls, mut ms) = (Vec::new(), Vec::new());
        for r in 0..repeat.max(1) {
            let mut rng = RngStream::new(seed).derive(e as u64).derive(r as u64);
            let t = Instant::now();
            let (_, st) = aggregate_aj(&g, lambda, 0, &[], n, &mut rng, &BinomialOracle::new(n), opts)?;
            ms.push(t.elapsed().as_secs_f64() * 1e3);
            calls.push(st.calls as f64);
        }
        rows.push(ScalingRow { size: n, calls: median(&mut calls), wall_ms: median(&mut ms) });
    }
    let d = degree as f64;
    Ok(report("aggregate-aj", rows, 1.0 - 2f64.ln() / (d.ln() + 2f64.ln()) + 0.05))
}

/// Total oracle calls of SAW-mode hardcore counting on random Δ-regular graphs
/// with n = 2^e. Only `coords` evenly spaced coordinates are run; their mean
/// work is scaled to all n coordinates and the k repetitions.
pub fn saw_scaling(exps: &[u32], degree: usize, lambda: f64, epsilon: f64, coords: usize, repeat: usize, seed: u64) -> Result<ScalingReport> {
    let params = TwoSpinParams::hardcore(lambda);
    let sampler = AjSampler { lambda, opts: AjOptions { override_regime: true, coin_skew: 0.0 } };
    let coords = coords.max(1);
    let mut rows = Vec::new();
    let mut bound = f64::NAN;
    for &e in exps {
        let n = 1usize << e;
        let g = Graph::random_regular(n, degree, &mut RngStream::new(seed).derive_str("graph").derive(e as u64))?;
        let model = TwoSpinModel::new(g.clone(), params)?;
        let delta = saw_delta(&model, &CountingOptions::new(Mode::Saw))?;
        bound = 2.0 - boundary_exponent(degree, delta) + 0.1;
        let b = CountingModel::TwoSpin(model).marginal_bound(Mode::Saw);
        let budget = choose_sample_budget(b, n, epsilon, Mode::Saw, &Calibration::default());
        let (mut calls, mut ms) = (Vec::new(), Vec::new());
        for r in 0..repeat.max(1) {
            let mut rng = RngStream::new(seed).derive(e as u64).derive(r as u64);
            let t = Instant::now();
            let mut work = 0u64;
            for j in 0..coords {
                // the all-zero reference configuration pins the prefix
                let i = j * n / coords;
                let tau = Pinning::zeros(&(0..i).collect::<Vec<_>>());
                work += estimate_marginal_saw(&g, i, &tau, &params, delta, budget as f64, &sampler, &mut rng)?.oracle_queries;
            }
            ms.push(t.elapsed().as_secs_f64() * 1e3);
            calls.push(work as f64 / coords as f64 * n as f64 * REPETITIONS as f64);
        }
        rows.push(ScalingRow { size: n as u64, calls: median(&mut calls), wall_ms: median(&mut ms) });
    }
    Ok(report("saw", rows, bound))
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub coordinate: usize,
    pub mean: f64,
    pub rel_var: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub n: usize,
    pub delta: f64,
    pub b: f64,
    pub budget: u64,
    pub rows: Vec<VarianceRow>,
}

/// Empirical Var[P]/E[P]² of the SAW estimator at the default budget for
/// hardcore counting on a random Δ-regular graph, at the given coordinates
/// with the ground prefix pinned.
pub fn saw_variance(
    n: usize,
    degree: usize,
    lambda: f64,
    epsilon: f64,
    coordinates: &[usize],
    seeds: u64,
    calibration: &Calibration,
    seed: u64,
) -> Result<VarianceReport> {
    let g = Graph::random_regular(n, degree, &mut RngStream::new(seed).derive_str("graph"))?;
    let params = TwoSpinParams::hardcore(lambda);
    let model = TwoSpinModel::new(g.clone(), params)?;
    let delta = saw_delta(&model, &CountingOptions::new(Mode::Saw))?;
    let b = CountingModel::TwoSpin(model).marginal_bound(Mode::Saw);
    let budget = choose_sample_budget(b, n, epsilon, Mode::Saw, calibration);
    let sampler = AjSampler { lambda, opts: AjOptions::default() };
    let mut rows = Vec::new();
    for &i in coordinates {
        let tau = Pinning::zeros(&(0..i).collect::<Vec<_>>());
        let mut ps = Vec::with_capacity(seeds as usize);
        for s in 0..seeds {
            let mut rng = RngStream::new(seed).derive(i as u64).derive(s);
            // P estimates the occupied marginal; the ratio for the ground spin is 1 - P
            ps.push(1.0 - estimate_marginal_saw(&g, i, &tau, &params, delta, budget as f64, &sampler, &mut rng)?.p);
        }
        let (mean, var) = mean_var(&ps);
        rows.push(VarianceRow { coordinate: i, mean, rel_var: var / (mean * mean) });
    }
    Ok(VarianceReport { n, delta, b, budget, rows })
}
