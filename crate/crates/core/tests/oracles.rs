//! Samplers and estimators against independently computed laws.

use statrs::distribution::{Binomial, Discrete};
use statrs::function::gamma::ln_gamma;

use subquad::counting::{fpras, CountingModel, CountingOptions, CountingTask, Mode};
use subquad::graph::{Graph, Pinning};
use subquad::models::{uniqueness_gap, PolymerModel, TwoSpinModel, TwoSpinParams};
use subquad::oracle::{PinView, PinnedGraph};
use subquad::rng::{sample_binomial, sample_multinomial_dense, sample_polymer_multinomial, BinomialOracle, RngStream};
use subquad::samplers::{aj_sample, ms_abstract, AjOptions, AjSampler, AjScenario, Budget};
use subquad::saw::estimate_marginal_saw;
use subquad::stats::{chi_square_gof, chi_square_two_sample, log_log_slope, mean_var};

const ALPHA: f64 = 1e-3;

#[test]
fn binomial_matches_exact_pmf() {
    let (n, p) = (1000u64, 0.3);
    let oracle = BinomialOracle::new(n);
    let mut rng = RngStream::new(1);
    let mut hist = vec![0u64; n as usize + 1];
    for _ in 0..1_000_000 {
        hist[sample_binomial(&oracle, n, p, &mut rng).unwrap() as usize] += 1;
    }
    let exact = Binomial::new(p, n).unwrap();
    let pmf: Vec<f64> = (0..=n).map(|k| exact.pmf(k)).collect();
    let t = chi_square_gof(&hist, &pmf);
    assert!(t.passes(ALPHA), "{t:?}");
}

#[test]
fn multinomial_matches_exact_pmf() {
    let probs = [0.5, 0.3, 0.2];
    let n = 300u64;
    let oracle = BinomialOracle::new(n);
    let mut rng = RngStream::new(2);
    let idx = |a: u64, b: u64| (a * (n + 1) + b) as usize;
    let mut hist = vec![0u64; ((n + 1) * (n + 1)) as usize];
    for _ in 0..100_000 {
        let x = sample_multinomial_dense(&oracle, n, &probs, &mut rng).unwrap();
        assert_eq!(x.iter().sum::<u64>(), n);
        hist[idx(x[0], x[1])] += 1;
    }
    let lnf = |k: u64| ln_gamma(k as f64 + 1.0);
    let mut pmf = vec![0.0; hist.len()];
    for a in 0..=n {
        for b in 0..=n - a {
            let c = n - a - b;
            pmf[idx(a, b)] = (lnf(n) - lnf(a) - lnf(b) - lnf(c)
                + a as f64 * probs[0].ln()
                + b as f64 * probs[1].ln()
                + c as f64 * probs[2].ln())
            .exp();
        }
    }
    let t = chi_square_gof(&hist, &pmf);
    assert!(t.passes(ALPHA), "{t:?}");
}

#[test]
fn polymer_multinomial_matches_enumerated_proposal() {
    let model = PolymerModel::geometric(Graph::path(4), 2, 6.0).unwrap();
    let u = 1;
    let all = model.polymers_containing(u, 4);
    let mut pmf: Vec<f64> = all.iter().map(|(_, w)| *w).collect();
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    let n = 200_000u64;
    let (counts, empty) = sample_polymer_multinomial(&model, u, n, &mut RngStream::new(3), &BinomialOracle::new(n)).unwrap();
    let mut hist = vec![0u64; all.len() + 1];
    for (p, c) in counts {
        let i = all.iter().position(|(q, _)| *q == p).expect("sampled polymer contains u");
        hist[i] += c;
    }
    hist[all.len()] = empty;
    assert_eq!(hist.iter().sum::<u64>(), n);
    let t = chi_square_gof(&hist, &pmf);
    assert!(t.passes(ALPHA), "{t:?}");
}

#[test]
fn encoded_scenario_matches_direct_sampler() {
    let g = Graph::path(3);
    let lambda = 0.3;
    let pins = Pinning::new();
    let mut oracle = PinnedGraph::new(&g, &pins);
    let (mut a, mut b) = ([0u64; 2], [0u64; 2]);
    let mut r1 = RngStream::new(4);
    let mut r2 = RngStream::new(5);
    for _ in 0..100_000 {
        a[ms_abstract(&AjScenario { lambda }, &mut oracle, 0, &PinView::new(), &mut r1, &mut Budget::default()).unwrap() as usize] += 1;
        b[aj_sample(&g, lambda, 0, &[], &mut r2, AjOptions::default()).unwrap() as usize] += 1;
    }
    let t = chi_square_two_sample(&a, &b);
    assert!(t.passes(ALPHA), "{t:?} {a:?} {b:?}");
}

#[test]
fn isolated_vertex_at_unit_fugacity_is_fair() {
    let g = Graph::from_edges(1, &[]).unwrap();
    let mut rng = RngStream::new(6);
    let draws = 100_000;
    let ones: u64 = (0..draws)
        .map(|_| aj_sample(&g, 1.0, 0, &[], &mut rng, AjOptions { override_regime: true, coin_skew: 0.0 }).unwrap() as u64)
        .sum();
    let sigma = (draws as f64 * 0.25).sqrt();
    assert!((ones as f64 - draws as f64 / 2.0).abs() <= 4.0 * sigma, "{ones}");
}

#[test]
fn uniqueness_gap_matches_bisection() {
    // fixed point of x(1+x)^2 = λ at Δ = 3, bisected here independently
    let lambda = 0.5;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid * (1.0 + mid).powi(2) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let expected = 1.0 - 2.0 * x / (1.0 + x);
    let rep = uniqueness_gap(&TwoSpinParams::hardcore(lambda), 3).unwrap();
    assert!((rep.delta.unwrap() - expected).abs() < 1e-9, "{:?} vs {expected}", rep.delta);
    let critical = uniqueness_gap(&TwoSpinParams::hardcore(4.0), 3).unwrap();
    assert!(!critical.is_unique || critical.delta.map_or(true, |d| d <= 1e-6));
}

#[test]
fn saw_variance_decays_with_budget() {
    let n = 64;
    let g = Graph::random_regular(n, 3, &mut RngStream::new(7)).unwrap();
    let lambda = 0.3;
    let params = TwoSpinParams::hardcore(lambda);
    let delta = uniqueness_gap(&params, 3).unwrap().delta.unwrap();
    let sampler = AjSampler { lambda, opts: AjOptions::default() };
    let tau = Pinning::new();
    let mut points = Vec::new();
    for budget in [16.0, 64.0, 256.0] {
        let ps: Vec<f64> = (0..3000u64)
            .map(|s| estimate_marginal_saw(&g, 0, &tau, &params, delta, budget, &sampler, &mut RngStream::new(s)).unwrap().p)
            .collect();
        let (m, v) = mean_var(&ps);
        points.push((budget, v / (m * m)));
    }
    let slope = log_log_slope(&points);
    assert!(slope < -0.5, "relative variance should fall roughly like 1/N: {points:?}, slope {slope}");
}

#[test]
fn triangle_saw_coverage_at_eps_02() {
    let model = CountingModel::TwoSpin(TwoSpinModel::new(Graph::complete(3), TwoSpinParams::hardcore(1.0)).unwrap());
    let opts = CountingOptions::new(Mode::Saw);
    let eps = 0.2;
    let hits = (0..400u64)
        .filter(|&s| {
            let r = fpras(&CountingTask::new(model.clone(), eps, s).unwrap(), &opts).unwrap();
            // μ(σ*) = 1/4 exactly, so Ẑ = 1/M lands within e^{±ε} of 4 iff M does of 1/4
            (r.log_z_hat - 4f64.ln()).abs() <= eps
        })
        .count();
    assert!(hits >= 280, "{hits}/400");
}
