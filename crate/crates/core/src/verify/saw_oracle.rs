//! Reference SAW constructions built from scratch on explicit graphs, used to
//! check the incremental cursor and the flower oracle.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{brute_force_partition, TwoSpinModel, TwoSpinParams};
use crate::saw::FlowerOracle;

/// SAW tree materialized by enumerating walks. A walk closing a cycle at w
/// through w, a, ..., z becomes a leaf pinned to 1[z > a].
#[derive(Debug, Clone, PartialEq)]
pub enum NaiveTree {
    Pinned(Spin),
    Free(Vec<NaiveTree>),
}

pub fn naive_saw_tree(g: &Graph, tau: &Pinning, v: usize) -> NaiveTree {
    let mut path = vec![v];
    naive_rec(g, tau, &mut path, usize::MAX)
}

fn naive_rec(g: &Graph, tau: &Pinning, path: &mut Vec<usize>, depth_left: usize) -> NaiveTree {
    let t = *path.last().unwrap();
    if let Some(c) = tau.get(t) {
        return NaiveTree::Pinned(c);
    }
    let parent = (path.len() >= 2).then(|| path[path.len() - 2]);
    let mut kids = Vec::new();
    let mut closing = Vec::new();
    for &x in g.neighbors(t) {
        if Some(x) == parent {
            continue;
        }
        if let Some(j) = path.iter().position(|&y| y == x) {
            closing.push(NaiveTree::Pinned((t > path[j + 1]) as Spin));
        } else if let Some(c) = tau.get(x) {
            kids.push(NaiveTree::Pinned(c));
        } else if depth_left > 0 {
            path.push(x);
            kids.push(naive_rec(g, tau, path, depth_left - 1));
            path.pop();
        } else {
            kids.push(NaiveTree::Free(vec![]));
        }
    }
    kids.extend(closing);
    NaiveTree::Free(kids)
}

/// Root marginal ratio (p1, p0) by the plain recursion R = λ∏(βR+1)/(R+γ).
pub fn naive_tree_marginal(t: &NaiveTree, p: &TwoSpinParams) -> f64 {
    let (z1, z0) = naive_tree_z(t, p);
    z1 / (z1 + z0)
}

fn naive_tree_z(t: &NaiveTree, p: &TwoSpinParams) -> (f64, f64) {
    match t {
        NaiveTree::Pinned(c) => if *c == 1 { (1.0, 0.0) } else { (0.0, 1.0) },
        NaiveTree::Free(ch) => {
            let (mut z1, mut z0) = (p.lambda, 1.0);
            for c in ch {
                let (a, b) = naive_tree_z(c, p);
                z1 *= p.beta * a + b;
                z0 *= a + p.gamma * b;
                let s = z1.max(z0);
                z1 /= s;
                z0 /= s;
            }
            (z1, z0)
        }
    }
}

/// Walks from v up to `depth` steps, each with the multiset of its children
/// as (pinned spin or free) tags. Used to compare against the cursor.
pub fn naive_children_profile(g: &Graph, tau: &Pinning, walk: &[usize]) -> Vec<Option<Spin>> {
    let mut path = walk.to_vec();
    let mut out = match naive_rec(g, tau, &mut path, 0) {
        NaiveTree::Pinned(_) => vec![],
        NaiveTree::Free(ch) => ch
            .iter()
            .map(|c| match c {
                NaiveTree::Pinned(s) => Some(*s),
                NaiveTree::Free(_) => None,
            })
            .collect(),
    };
    out.sort();
    out
}

/// Explicit derived graph of a walk, restricted to the component of its tip.
/// Returns the graph, its pinning and the tip's index.
pub fn naive_derived_graph(g: &Graph, tau: &Pinning, walk: &[usize]) -> (Graph, Pinning, usize) {
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|x| g.neighbors(x).iter().copied().collect()).collect();
    let mut pin: Vec<Option<Spin>> = (0..n).map(|x| tau.get(x)).collect();
    let mut alive = vec![true; n];
    for s in walk.windows(2) {
        let (t, u) = (s[0], s[1]);
        let others: Vec<usize> = adj[t].iter().copied().filter(|&x| x != u && pin[x].is_none()).collect();
        for x in others {
            let c = adj.len();
            adj.push(BTreeSet::from([x]));
            pin.push(Some((x > u) as Spin));
            alive.push(true);
            adj[x].insert(c);
        }
        for x in std::mem::take(&mut adj[t]) {
            adj[x].remove(&t);
        }
        alive[t] = false;
    }
    // pinned-pinned edges only scale the weight; drop them
    for x in 0..adj.len() {
        if pin[x].is_some() {
            let keep: BTreeSet<usize> = adj[x].iter().copied().filter(|&y| pin[y].is_none()).collect();
            adj[x] = keep;
        }
    }
    for x in 0..adj.len() {
        let a: Vec<usize> = adj[x].iter().copied().collect();
        for y in a {
            adj[y].insert(x);
        }
    }
    let tip = *walk.last().unwrap();
    let mut idx = vec![usize::MAX; adj.len()];
    let mut order = vec![tip];
    idx[tip] = 0;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        // a pinned vertex separates: its other edges do not affect the tip
        if pin[x].is_some() && x != tip {
            continue;
        }
        for &y in &adj[x] {
            if idx[y] == usize::MAX && alive[y] {
                idx[y] = order.len();
                order.push(y);
            }
        }
    }
    let mut edges = BTreeSet::new();
    for &x in &order {
        if pin[x].is_some() && x != tip {
            continue;
        }
        for &y in &adj[x] {
            if idx[y] != usize::MAX {
                edges.insert((idx[x].min(idx[y]), idx[x].max(idx[y])));
            }
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let pins = Pinning::from_pairs(order.iter().enumerate().filter_map(|(i, &x)| pin[x].map(|c| (i, c))));
    (Graph::from_edges(order.len(), &edges).unwrap(), pins, 0)
}

/// Z of a flower with its tip pinned to `c`, by enumeration.
pub fn flower_weight(g: &Graph, tau: &Pinning, walk: &[usize], params: &TwoSpinParams, c: Spin) -> Result<f64> {
    let (h, pins, tip) = naive_derived_graph(g, tau, walk);
    let model = TwoSpinModel::new(h, *params)?;
    brute_force_partition(&model, &pins.with(tip, c))
}

/// Root marginal of the flowered tree: Σ over boundary spins of weight times
/// the conditional root marginal, computed from independent flower weights.
pub fn flowered_root_marginal(o: &FlowerOracle, params: &TwoSpinParams, flowers: &[[f64; 2]]) -> f64 {
    let k = o.boundary_nodes().len();
    let (mut num, mut den) = (0.0, 0.0);
    let mut sigma = vec![0u8; k];
    for mask in 0u64..(1 << k) {
        for (i, s) in sigma.iter_mut().enumerate() {
            *s = (mask >> i & 1) as Spin;
        }
        let (w1, w) = boundary_joint(o, params, &sigma, flowers);
        num += w1;
        den += w;
    }
    num / den
}

/// Unnormalized weight of boundary spins `sigma` (in boundary order) on the
/// flowered tree, and its part with the root at 1. Flower tips carry their
/// field inside `flowers`, so the tree side pins them without one.
pub fn boundary_joint(o: &FlowerOracle, params: &TwoSpinParams, sigma: &[Spin], flowers: &[[f64; 2]]) -> (f64, f64) {
    let bnodes = o.boundary_nodes();
    let mut val = vec![[0.0f64; 2]; o.num_tree_nodes()];
    for id in (0..o.num_tree_nodes()).rev() {
        let nd = o.node(id);
        val[id] = if let Some(c) = nd.pin {
            if c == 1 { [0.0, 1.0] } else { [1.0, 0.0] }
        } else if nd.flower.is_some() {
            let i = bnodes.iter().position(|&b| b == id).unwrap();
            let mut z = [0.0; 2];
            z[sigma[i] as usize] = flowers[i][sigma[i] as usize];
            z
        } else {
            let mut z = [1.0, params.lambda];
            for &ch in &nd.children {
                let [a0, a1] = val[ch];
                z[1] *= params.beta * a1 + a0;
                z[0] *= a1 + params.gamma * a0;
            }
            z
        };
    }
    (val[0][1], val[0][0] + val[0][1])
}
