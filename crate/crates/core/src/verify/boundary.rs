use rand::Rng;

use crate::error::Result;
use crate::graph::{Graph, Pinning};
use crate::rng::RngStream;
use crate::saw::{boundary, boundary_depth_bound, boundary_depth_bound_any, boundary_size_bound, CompleteTree, SawCursor};

use super::{Check, VerifyConfig};

const SLACK: f64 = 1e-9;

/// Budgets run through the full truncation: all N ≤ 1024, powers of two
/// and their neighbors up to 2^16, and random draws in between.
pub fn budget_grid(rng: &mut RngStream) -> Vec<u64> {
    let mut ns: Vec<u64> = (2..=1024).collect();
    for j in 11..=16 {
        ns.extend([(1u64 << j) - 1, 1 << j, (1 << j) + 1]);
    }
    for _ in 0..64 {
        ns.push(rng.gen_range(1025..=1 << 16));
    }
    ns.sort_unstable();
    ns.dedup();
    ns.retain(|&n| n <= 1 << 16);
    ns
}

/// Size and depth of the truncation of the complete Δ-ary tree at budget N,
/// following a single root-to-boundary path: all paths are alike.
pub fn complete_tree_profile(arity: usize, delta: f64, budget: f64) -> (f64, usize) {
    let mut n = budget;
    let mut depth = 0;
    while n > 1.0 {
        n = n * (1.0 - delta) / arity as f64;
        depth += 1;
    }
    ((arity as f64).powi(depth as i32), depth)
}

/// The boundary size and depth bounds, exactly on complete trees and on
/// SAW trees of random regular graphs.
pub fn boundary_bounds(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(cfg.seed).derive_str("boundary");
    let grid = budget_grid(&mut rng);
    let mut out = Vec::new();
    let (mut runs, mut bad, mut mismatch) = (0usize, Vec::new(), 0usize);
    let mut closed_bad = 0usize;
    for arity in [3usize, 4, 5] {
        for delta in [0.1, 0.3, 0.5] {
            for n in 2..=(1u64 << 16) {
                let (size, depth) = complete_tree_profile(arity, delta, n as f64);
                if size > boundary_size_bound(arity, delta, n as f64) * (1.0 + SLACK)
                    || depth as f64 > boundary_depth_bound(arity, delta, n as f64) + SLACK
                {
                    closed_bad += 1;
                }
            }
            for &n in &grid {
                let s = boundary(&mut CompleteTree::new(arity, None), delta, n as f64);
                runs += 1;
                let bound = boundary_size_bound(arity, delta, n as f64);
                if s.len() as f64 > bound * (1.0 + SLACK) || !s.is_antichain() {
                    bad.push(format!("D={arity} d={delta} N={n}: |S|={} bound {bound:.1}", s.len()));
                }
                let (size, depth) = complete_tree_profile(arity, delta, n as f64);
                if size != s.len() as f64 || depth != s.depth {
                    mismatch += 1;
                }
            }
        }
    }
    out.push(Check::new(
        "boundary",
        "complete-trees/size-antichain",
        bad.is_empty(),
        match bad.first() {
            None => format!("{runs} truncations within D*N^(1-x), all antichains"),
            Some(b) => format!("{} violations, first {b}", bad.len()),
        },
    ));
    out.push(Check::new(
        "boundary",
        "complete-trees/every-budget",
        closed_bad == 0 && mismatch == 0,
        format!("all N in 2..2^16: {closed_bad} bound violations; path profile disagrees with the truncation in {mismatch}/{runs} runs"),
    ));

    let mut saw_bad = Vec::new();
    let mut saw_runs = 0;
    let mut past_regular = 0;
    for d in [3usize, 4] {
        let g = Graph::random_regular(40, d, &mut rng)?;
        let tau = Pinning::new();
        for delta in [0.1, 0.3, 0.5] {
            for n in [2.0, 10.0, 100.0, 1000.0, 5000.0] {
                let s = boundary(&mut SawCursor::new(&g, &tau, 0), delta, n);
                saw_runs += 1;
                if s.len() as f64 > boundary_size_bound(d, delta, n) * (1.0 + SLACK)
                    || s.depth as f64 > boundary_depth_bound_any(delta, n) + SLACK
                    || !s.is_antichain()
                {
                    saw_bad.push(format!("D={d} d={delta} N={n}: |S|={} depth {}", s.len(), s.depth));
                }
                if s.depth as f64 > boundary_depth_bound(d, delta, n) + SLACK {
                    past_regular += 1;
                }
            }
        }
    }
    out.push(Check::new(
        "boundary",
        "saw-trees",
        saw_bad.is_empty(),
        saw_bad.first().cloned().unwrap_or_else(|| format!("{saw_runs} truncations within size and depth bounds; {past_regular} deeper than the (D-1)-ary profile")),
    ));
    Ok(out)
}
