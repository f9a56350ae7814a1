//! The SAW tree with flowers: the part 𝒯 of the SAW tree not strictly below
//! the boundary, with each boundary node s carrying the derived graph of its
//! walk (the flower) in place of its subtree.
//!
//! Ids: 𝒯 nodes are 0..m with the root at 0. Flower f owns the block
//! m + f·stride + [0, stride): original vertex x maps to offset x and the
//! i-th copy to offset n + i. The tip of the flower's walk is the boundary
//! node itself.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Graph, Pinning, Spin};
use crate::models::{tree_recursion_step, MarginalRatio, TwoSpinParams};
use crate::oracle::GraphOracle;

use super::boundary::BoundarySet;
use super::walk::{Derived, SawCursor};

/// Cap on |𝒯|; reached only when the boundary leaves large subtrees uncut.
pub const TREE_NODE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    /// Original vertex, `None` for copies.
    pub vertex: Option<usize>,
    pub pin: Option<Spin>,
    pub children: Vec<usize>,
    pub flower: Option<usize>,
}

#[derive(Debug, Clone)]
struct Flower {
    node: usize,
    walk: Vec<usize>,
}

#[derive(Debug, Default)]
struct Trie {
    terminal: bool,
    next: BTreeMap<u32, Trie>,
}

pub struct FlowerOracle<'a> {
    cursor: SawCursor<'a>,
    n: usize,
    max_degree: usize,
    nodes: Vec<TreeNode>,
    flowers: Vec<Flower>,
    stride: usize,
    cached: Option<usize>,
    sigma: HashMap<usize, Spin>,
    scratch: Vec<Derived>,
    pub queries: u64,
}

/// Indexes 𝒯 for the boundary `s` of the SAW tree of (G, τ) at `v`.
pub fn build_flower<'a>(g: &'a Graph, v: usize, s: &BoundarySet, tau: &'a Pinning) -> Result<FlowerOracle<'a>> {
    if !s.is_antichain() {
        return Err(Error::NotAntichain);
    }
    let mut trie = Trie::default();
    for p in &s.paths {
        let mut t = &mut trie;
        for &i in p {
            t = t.next.entry(i).or_default();
        }
        t.terminal = true;
    }
    let mut o = FlowerOracle {
        cursor: SawCursor::new(g, tau, v),
        n: g.n(),
        max_degree: g.max_degree(),
        nodes: vec![TreeNode { parent: None, vertex: Some(v), pin: tau.get(v), children: vec![], flower: None }],
        flowers: Vec::new(),
        stride: 0,
        cached: None,
        sigma: HashMap::new(),
        scratch: Vec::new(),
        queries: 0,
    };
    let mut max_walk = 1;
    o.expand(0, Some(&trie), &mut max_walk)?;
    o.stride = o.n + o.max_degree * max_walk;
    o.cursor.reset();
    Ok(o)
}

impl<'a> FlowerOracle<'a> {
    fn expand(&mut self, id: usize, trie: Option<&Trie>, max_walk: &mut usize) -> Result<()> {
        if trie.is_some_and(|t| t.terminal) {
            let walk = self.cursor.walk().vertices().to_vec();
            *max_walk = (*max_walk).max(walk.len());
            self.nodes[id].flower = Some(self.flowers.len());
            self.flowers.push(Flower { node: id, walk });
            return Ok(());
        }
        if self.nodes[id].pin.is_some() {
            return Ok(());
        }
        let children = self.cursor.children();
        let mut free_idx = 0u32;
        let mut free = Vec::new();
        for ch in &children {
            let (vertex, pin) = match ch.node {
                Derived::Orig(x) => (Some(x), ch.pin),
                Derived::Copy(_) => (None, ch.pin),
            };
            let cid = self.nodes.len();
            if cid >= TREE_NODE_LIMIT {
                return Err(Error::TreeTooLarge { nodes: TREE_NODE_LIMIT });
            }
            self.nodes.push(TreeNode { parent: Some(id), vertex, pin, children: vec![], flower: None });
            self.nodes[id].children.push(cid);
            if pin.is_none() {
                free.push((cid, vertex.unwrap(), free_idx));
                free_idx += 1;
            }
        }
        if let Some(t) = trie {
            if let Some(&i) = t.next.keys().next_back().filter(|&&i| i >= free_idx) {
                return Err(Error::InvalidParams(format!("boundary path uses child {i} of a node with {free_idx}")));
            }
        }
        for (cid, x, i) in free {
            // off the boundary paths the whole subtree stays in 𝒯
            let sub = trie.and_then(|t| t.next.get(&i));
            self.cursor.step(x)?;
            self.expand(cid, sub, max_walk)?;
            self.cursor.back();
        }
        Ok(())
    }

    pub fn num_tree_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Tree ids of the boundary nodes, in boundary order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.flowers.iter().map(|f| f.node).collect()
    }

    pub fn flower_walk(&self, f: usize) -> &[usize] {
        &self.flowers[f].walk
    }

    pub fn set_boundary_spin(&mut self, id: usize, c: Spin) {
        self.sigma.insert(id, c);
    }

    pub fn clear_boundary_spins(&mut self) {
        self.sigma.clear();
    }

    /// Cursor operations spent on flower rebuilding.
    pub fn rebuild_ops(&self) -> u64 {
        self.cursor.ops()
    }

    fn load(&mut self, f: usize) {
        if self.cached != Some(f) {
            let walk = self.flowers[f].walk.clone();
            self.cursor.goto(&walk).expect("flower walk replays");
            self.cached = Some(f);
        }
    }

    fn split(&self, x: usize) -> (usize, Derived) {
        let m = self.nodes.len();
        let (f, off) = ((x - m) / self.stride, (x - m) % self.stride);
        let d = if off < self.n { Derived::Orig(off) } else { Derived::Copy(off - self.n) };
        (f, d)
    }

    fn id_of(&self, f: usize, d: Derived) -> usize {
        let tip = *self.flowers[f].walk.last().unwrap();
        let base = self.nodes.len() + f * self.stride;
        match d {
            Derived::Orig(x) if x == tip => self.flowers[f].node,
            Derived::Orig(x) => base + x,
            Derived::Copy(i) => base + self.n + i,
        }
    }

    fn flower_neighbors(&mut self, f: usize, d: Derived, out: &mut Vec<usize>) {
        self.load(f);
        let mut buf = std::mem::take(&mut self.scratch);
        self.cursor.walk_mut().derived_neighbors(d, &mut buf);
        out.extend(buf.iter().map(|&y| self.id_of(f, y)));
        self.scratch = buf;
    }

    /// Root marginal by the tree recursion over 𝒯, with boundary nodes
    /// pinned by the spins set so far. Fails if a boundary spin is missing.
    pub fn root_marginal(&self, params: &TwoSpinParams) -> Result<MarginalRatio> {
        let mut r = vec![MarginalRatio::PINNED_ZERO; self.nodes.len()];
        // children have larger ids than parents
        for id in (0..self.nodes.len()).rev() {
            let nd = &self.nodes[id];
            r[id] = if let Some(c) = nd.pin {
                MarginalRatio::pinned(c)
            } else if nd.flower.is_some() {
                let c = self.sigma.get(&id).ok_or_else(|| Error::InvalidParams("boundary spin not set".into()))?;
                MarginalRatio::pinned(*c)
            } else {
                let ch: Vec<MarginalRatio> = nd.children.iter().map(|&c| r[c]).collect();
                tree_recursion_step(params, &ch)?
            };
        }
        Ok(r[0])
    }
}

impl GraphOracle for FlowerOracle<'_> {
    fn neighbors(&mut self, x: usize, out: &mut Vec<usize>) {
        self.queries += 1;
        out.clear();
        let m = self.nodes.len();
        if x < m {
            let nd = &self.nodes[x];
            out.extend(nd.parent);
            out.extend_from_slice(&nd.children);
            if let Some(f) = nd.flower {
                let tip = *self.flowers[f].walk.last().unwrap();
                self.flower_neighbors(f, Derived::Orig(tip), out);
            }
        } else {
            let (f, d) = self.split(x);
            self.flower_neighbors(f, d, out);
        }
    }

    fn pinning(&mut self, x: usize) -> Option<Spin> {
        self.queries += 1;
        if let Some(&c) = self.sigma.get(&x) {
            return Some(c);
        }
        if x < self.nodes.len() {
            return self.nodes[x].pin;
        }
        let (f, d) = self.split(x);
        match d {
            Derived::Orig(v) => self.cursor.walk().tau().get(v),
            Derived::Copy(_) => {
                self.load(f);
                self.cursor.walk().derived_pin(d)
            }
        }
    }

    fn max_degree(&self) -> usize {
        self.max_degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saw::boundary::boundary;

    #[test]
    fn unit_budget_is_the_graph() {
        let g = Graph::cycle(5);
        let tau = Pinning::new();
        let s = boundary(&mut SawCursor::new(&g, &tau, 0), 0.3, 1.0);
        let mut o = build_flower(&g, 0, &s, &tau).unwrap();
        assert_eq!(o.num_tree_nodes(), 1);
        let mut out = Vec::new();
        o.neighbors(0, &mut out);
        let m = 1;
        assert_eq!(out, vec![m + 1, m + 4]);
        o.neighbors(m + 2, &mut out);
        assert_eq!(out, vec![m + 1, m + 3]);
        o.neighbors(m + 1, &mut out);
        assert_eq!(out, vec![0, m + 2]);
    }

    #[test]
    fn rejects_non_antichain() {
        let g = Graph::path(3);
        let tau = Pinning::new();
        let s = BoundarySet { paths: vec![vec![], vec![0]], depth: 1, size: 0 };
        assert!(matches!(build_flower(&g, 0, &s, &tau), Err(Error::NotAntichain)));
    }

    #[test]
    fn empty_boundary_is_whole_tree() {
        let g = Graph::complete(3);
        let tau = Pinning::new();
        let s = BoundarySet { paths: vec![], depth: 0, size: 0 };
        let o = build_flower(&g, 0, &s, &tau).unwrap();
        // 0 -> {1 -> 2 -> copy, 2 -> 1 -> copy}
        assert_eq!(o.num_tree_nodes(), 7);
        let p = TwoSpinParams::hardcore(1.0);
        assert!((o.root_marginal(&p).unwrap().prob_one() - 0.25).abs() < 1e-12);
    }
}
