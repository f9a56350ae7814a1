use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::corpus::connected_graphs;
use crate::error::Result;
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{brute_force_marginal, brute_force_partition, TwoSpinModel, TwoSpinParams};
use crate::oracle::GraphOracle;
use crate::rng::RngStream;
use crate::saw::{boundary, build_flower, BoundarySet, FlowerOracle, SawCursor};

use super::saw_oracle::{boundary_joint, flower_weight, naive_children_profile, naive_saw_tree, naive_tree_marginal};
use super::{rel_close, Check, VerifyConfig};

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SawScope {
    /// Graphs up to 5 vertices.
    Quick,
    /// The whole corpus, every root and every pinning.
    Full,
}

fn param_sets() -> Vec<(&'static str, TwoSpinParams)> {
    vec![
        ("hardcore", TwoSpinParams::hardcore(0.7)),
        ("ising", TwoSpinParams::ising(0.6, 1.3)),
        ("two-spin", TwoSpinParams { beta: 0.4, gamma: 1.7, lambda: 0.9 }),
    ]
}

/// Every pinning of the vertices other than `root`.
fn pinnings(n: usize, root: usize) -> Vec<Pinning> {
    let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(others.len() as u32) {
        let mut c = code;
        let mut p = Pinning::new();
        for &v in &others {
            if c % 3 > 0 {
                p.set(v, (c % 3 - 1) as Spin);
            }
            c /= 3;
        }
        out.push(p);
    }
    out
}

struct Instance {
    g: Graph,
    root: usize,
    tau: Pinning,
    label: &'static str,
    params: TwoSpinParams,
    mu: f64,
}

fn instances(scope: SawScope) -> Result<Vec<Instance>> {
    let max_n = if scope == SawScope::Full { 6 } else { 5 };
    let mut out = Vec::new();
    for g in connected_graphs(max_n, 3) {
        for root in 0..g.n() {
            for tau in pinnings(g.n(), root) {
                for (label, params) in param_sets() {
                    let model = TwoSpinModel::new(g.clone(), params)?;
                    if brute_force_partition(&model, &tau)? <= 0.0 {
                        continue;
                    }
                    let mu = brute_force_marginal(&model, root, 1, &tau)?;
                    out.push(Instance { g: g.clone(), root, tau: tau.clone(), label, params, mu });
                }
            }
        }
    }
    Ok(out)
}

fn flower_weights(inst: &Instance, o: &FlowerOracle) -> Result<Vec<[f64; 2]>> {
    (0..o.boundary_nodes().len())
        .map(|f| {
            let w = o.flower_walk(f);
            Ok([flower_weight(&inst.g, &inst.tau, w, &inst.params, 0)?, flower_weight(&inst.g, &inst.tau, w, &inst.params, 1)?])
        })
        .collect()
}

/// Z of the flower at boundary node `id`, read through the oracle: the
/// component of the tip, not crossing pinned vertices or the tree.
fn oracle_flower_weight(o: &mut FlowerOracle, id: usize, params: &TwoSpinParams, c: Spin) -> Result<f64> {
    let m = o.num_tree_nodes();
    let mut ids = vec![id];
    let mut edges = Vec::new();
    let mut buf = Vec::new();
    let mut i = 0;
    while i < ids.len() {
        let x = ids[i];
        i += 1;
        if x != id && o.pinning(x).is_some() {
            continue;
        }
        o.neighbors(x, &mut buf);
        for &y in buf.iter().filter(|&&y| y >= m) {
            let j = match ids.iter().position(|&z| z == y) {
                Some(j) => j,
                None => {
                    ids.push(y);
                    ids.len() - 1
                }
            };
            edges.push(((i - 1).min(j), (i - 1).max(j)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut pins = Pinning::new();
    for (k, &x) in ids.iter().enumerate().skip(1) {
        if let Some(s) = o.pinning(x) {
            pins.set(k, s);
        }
    }
    pins.set(0, c);
    let model = TwoSpinModel::new(Graph::from_edges(ids.len(), &edges)?, *params)?;
    brute_force_partition(&model, &pins)
}

fn unbiased_expectation(o: &mut FlowerOracle, params: &TwoSpinParams, flowers: &[[f64; 2]]) -> Result<f64> {
    let bnodes = o.boundary_nodes();
    let k = bnodes.len();
    let mut terms = Vec::new();
    let mut total = 0.0;
    for mask in 0u64..(1 << k) {
        let sigma: Vec<Spin> = (0..k).map(|i| (mask >> i & 1) as Spin).collect();
        let (_, w) = boundary_joint(o, params, &sigma, flowers);
        total += w;
        if w > 0.0 {
            for (&id, &s) in bnodes.iter().zip(&sigma) {
                o.set_boundary_spin(id, s);
            }
            terms.push((w, o.root_marginal(params)?.prob_one()));
        }
    }
    o.clear_boundary_spins();
    Ok(terms.iter().map(|(w, p)| w / total * p).sum())
}

/// Exact SAW identities: the full tree, the flowered tree for boundaries of
/// several budgets, the oracle's view of each flower, and the estimator's
/// expectation over all boundary configurations.
pub fn saw_identities(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let insts = instances(cfg.saw_scope)?;
    let (mut naive_bad, mut cursor_bad, mut flower_bad, mut view_bad, mut unb_bad) = (0, 0, 0, 0, 0);
    let (mut flower_n, mut view_n, mut unb_n) = (0, 0, 0);
    let mut worst = String::new();
    for inst in &insts {
        let naive = naive_tree_marginal(&naive_saw_tree(&inst.g, &inst.tau, inst.root), &inst.params);
        if !rel_close(naive, inst.mu, TOL) {
            naive_bad += 1;
            worst = format!("{} root {} tau {:?}: tree {naive} vs {}", inst.label, inst.root, inst.tau, inst.mu);
        }
        let whole = BoundarySet { paths: vec![], depth: 0, size: 0 };
        let full = build_flower(&inst.g, inst.root, &whole, &inst.tau)?.root_marginal(&inst.params)?.prob_one();
        if !rel_close(full, inst.mu, TOL) {
            cursor_bad += 1;
            worst = format!("{} root {} tau {:?}: cursor tree {full} vs {}", inst.label, inst.root, inst.tau, inst.mu);
        }
        for budget in [2.0, 4.0, 8.0] {
            let s = boundary(&mut SawCursor::new(&inst.g, &inst.tau, inst.root), 0.3, budget);
            let mut o = build_flower(&inst.g, inst.root, &s, &inst.tau)?;
            let fw = flower_weights(inst, &o)?;
            let k = s.len();
            if k > 12 {
                continue;
            }
            flower_n += 1;
            let (num, den) = (0u64..(1 << k)).fold((0.0, 0.0), |(a, b), mask| {
                let sigma: Vec<Spin> = (0..k).map(|i| (mask >> i & 1) as Spin).collect();
                let (w1, w) = boundary_joint(&o, &inst.params, &sigma, &fw);
                (a + w1, b + w)
            });
            if !rel_close(num / den, inst.mu, TOL) {
                flower_bad += 1;
                worst = format!("{} root {} N={budget}: flowered {} vs {}", inst.label, inst.root, num / den, inst.mu);
            }
            for (f, &id) in o.boundary_nodes().iter().enumerate() {
                view_n += 1;
                for c in 0..2 {
                    let w = oracle_flower_weight(&mut o, id, &inst.params, c)?;
                    if !rel_close(w, fw[f][c as usize], TOL) {
                        view_bad += 1;
                        worst = format!("{} root {} N={budget}: oracle flower {w} vs {}", inst.label, inst.root, fw[f][c as usize]);
                    }
                }
            }
            unb_n += 1;
            let e = unbiased_expectation(&mut o, &inst.params, &fw)?;
            if !rel_close(e, inst.mu, TOL) {
                unb_bad += 1;
                worst = format!("{} root {} N={budget}: E[P] {e} vs {}", inst.label, inst.root, inst.mu);
            }
        }
    }
    let n = insts.len();
    let line = |bad: usize, tot: usize| format!("{}/{tot} exact to {TOL:e}", tot - bad);
    let mut out = vec![
        Check::new("saw", "tree-identity/naive", naive_bad == 0, line(naive_bad, n)),
        Check::new("saw", "tree-identity/cursor", cursor_bad == 0, line(cursor_bad, n)),
        Check::new("saw", "flower-preservation", flower_bad == 0, line(flower_bad, flower_n)),
        Check::new("saw", "flower-oracle-view", view_bad == 0, line(view_bad, view_n)),
        Check::new("saw", "estimator-unbiased", unb_bad == 0, line(unb_bad, unb_n)),
    ];
    if !worst.is_empty() {
        out.push(Check::new("saw", "first-mismatch", false, worst));
    }
    out.push(cycle_example()?);
    out.push(cursor_profiles(cfg)?);
    out.push(cursor_cost(cfg)?);
    Ok(out)
}

/// Hardcore λ=0.3 on the 6-cycle with budget 8.
fn cycle_example() -> Result<Check> {
    let g = Graph::cycle(6);
    let tau = Pinning::new();
    let params = TwoSpinParams::hardcore(0.3);
    let mu = brute_force_marginal(&TwoSpinModel::new(g.clone(), params)?, 0, 1, &tau)?;
    let s = boundary(&mut SawCursor::new(&g, &tau, 0), 0.3, 8.0);
    let mut o = build_flower(&g, 0, &s, &tau)?;
    let inst = Instance { g: g.clone(), root: 0, tau: tau.clone(), label: "hardcore", params, mu };
    let fw = flower_weights(&inst, &o)?;
    let e = unbiased_expectation(&mut o, &params, &fw)?;
    Ok(Check::new("saw", "estimator-unbiased/C6", rel_close(e, mu, TOL), format!("|S|={} E[P]={e:.15} mu={mu:.15}", s.len())))
}

/// Child lists of the cursor against the from-scratch builder at every node
/// of depth ≤ 6 on random cubic graphs with random pins.
fn cursor_profiles(cfg: &VerifyConfig) -> Result<Check> {
    let mut rng = RngStream::new(cfg.seed).derive_str("saw-profiles");
    let (mut nodes, mut bad) = (0usize, 0usize);
    for _ in 0..3 {
        let g = Graph::random_regular(16, 3, &mut rng)?;
        let mut tau = Pinning::new();
        for v in 1..g.n() {
            if rng.gen_bool(0.15) {
                tau.set(v, rng.gen_range(0..2));
            }
        }
        let mut c = SawCursor::new(&g, &tau, 0);
        let mut stack = vec![(c.free_children(), 0usize)];
        loop {
            nodes += 1;
            let mut mine: Vec<Option<Spin>> = c.children().iter().map(|x| x.pin).collect();
            mine.sort();
            if mine != naive_children_profile(&g, &tau, c.walk().vertices()) {
                bad += 1;
            }
            // advance the depth-first walk
            loop {
                let Some((kids, i)) = stack.last_mut() else { break };
                if *i < kids.len() && c.depth() < 6 {
                    let u = kids[*i];
                    *i += 1;
                    c.step(u)?;
                    let fc = c.free_children();
                    stack.push((fc, 0));
                    break;
                }
                stack.pop();
                if !c.back() {
                    stack.clear();
                }
            }
            if stack.is_empty() {
                break;
            }
        }
    }
    Ok(Check::new("saw", "cursor-vs-naive-children", bad == 0, format!("{}/{nodes} nodes agree", nodes - bad)))
}

/// Operation counts per move and per child listing on random cubic graphs
/// of growing size: bounded by a constant in the degree, flat in n.
fn cursor_cost(cfg: &VerifyConfig) -> Result<Check> {
    let mut rng = RngStream::new(cfg.seed).derive_str("saw-cost");
    let mut worst_per_step = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let g = Graph::random_regular(n, 3, &mut rng)?;
        let tau = Pinning::new();
        let mut worst = 0u64;
        for _ in 0..20 {
            let mut c = SawCursor::new(&g, &tau, rng.gen_range(0..n));
            for _ in 0..40 {
                let before = c.ops();
                let kids = c.free_children();
                let Some(&u) = kids.choose(&mut rng) else { break };
                c.step(u)?;
                worst = worst.max(c.ops() - before);
            }
            while c.back() {}
        }
        worst_per_step.push(worst);
    }
    let flat = worst_per_step.iter().all(|&w| w <= 4 * 3 + 2);
    Ok(Check::new("saw", "cursor-cost", flat, format!("max ops per list+move at n=1e2,1e3,1e4: {worst_per_step:?}")))
}
