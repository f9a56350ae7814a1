//! Query access to a pinned graph: the interface perfect samplers run against.

use std::collections::HashMap;
use std::rc::Rc;

use crate::graph::{Graph, Pinning, Spin};

/// Neighbor and pinning queries. Implemented by an in-memory graph and by the
/// SAW-tree-with-flower oracle, whose vertex ids are not dense.
pub trait GraphOracle {
    /// Clears `out` and fills it with the neighbors of `x` in a fixed order.
    fn neighbors(&mut self, x: usize, out: &mut Vec<usize>);
    fn pinning(&mut self, x: usize) -> Option<Spin>;
    /// Upper bound on the degree of any vertex.
    fn max_degree(&self) -> usize;
}

#[derive(Debug, Clone)]
pub struct PinnedGraph<'a> {
    pub graph: &'a Graph,
    pub pinning: &'a Pinning,
    pub queries: u64,
}

impl<'a> PinnedGraph<'a> {
    pub fn new(graph: &'a Graph, pinning: &'a Pinning) -> Self {
        PinnedGraph { graph, pinning, queries: 0 }
    }
}

impl GraphOracle for PinnedGraph<'_> {
    fn neighbors(&mut self, x: usize, out: &mut Vec<usize>) {
        self.queries += 1;
        out.clear();
        out.extend_from_slice(self.graph.neighbors(x));
    }

    fn pinning(&mut self, x: usize) -> Option<Spin> {
        self.queries += 1;
        self.pinning.get(x)
    }

    fn max_degree(&self) -> usize {
        self.graph.max_degree()
    }
}

/// Local pins layered over an oracle, with an undo journal for recursive
/// samplers that pass pinnings by value.
#[derive(Debug, Default, Clone)]
pub struct Overlay {
    map: HashMap<usize, Spin>,
    journal: Vec<(usize, Option<Spin>)>,
}

impl Overlay {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: usize) -> Option<Spin> {
        self.map.get(&v).copied()
    }

    pub fn set(&mut self, v: usize, c: Spin) {
        let old = self.map.insert(v, c);
        self.journal.push((v, old));
    }

    pub fn mark(&self) -> usize {
        self.journal.len()
    }

    pub fn undo(&mut self, mark: usize) {
        while self.journal.len() > mark {
            let (v, old) = self.journal.pop().unwrap();
            match old {
                Some(c) => self.map.insert(v, c),
                None => self.map.remove(&v),
            };
        }
    }
}

/// Effective pin of `x`: local overlay first, then the oracle.
pub fn pin_of<O: GraphOracle + ?Sized>(oracle: &mut O, overlay: &Overlay, x: usize) -> Option<Spin> {
    overlay.get(x).or_else(|| oracle.pinning(x))
}

/// Persistent pinning extension sharing prefixes between branches.
#[derive(Debug, Clone, Default)]
pub struct PinView {
    head: Option<Rc<PinNode>>,
}

#[derive(Debug)]
struct PinNode {
    v: usize,
    c: Spin,
    next: Option<Rc<PinNode>>,
}

impl PinView {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(&self, v: usize, c: Spin) -> PinView {
        PinView { head: Some(Rc::new(PinNode { v, c, next: self.head.clone() })) }
    }

    pub fn get(&self, v: usize) -> Option<Spin> {
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            if node.v == v {
                return Some(node.c);
            }
            cur = node.next.as_deref();
        }
        None
    }

    /// Deltas in insertion order, latest binding per vertex.
    pub fn deltas(&self) -> Vec<(usize, Spin)> {
        let mut out: Vec<(usize, Spin)> = Vec::new();
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            if !out.iter().any(|&(v, _)| v == node.v) {
                out.push((node.v, node.c));
            }
            cur = node.next.as_deref();
        }
        out.reverse();
        out
    }

    /// Loads the view into an overlay (for handing to a recursive sampler).
    pub fn apply(&self, overlay: &mut Overlay) {
        for (v, c) in self.deltas() {
            overlay.set(v, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_undo() {
        let mut o = Overlay::new();
        o.set(1, 0);
        let m = o.mark();
        o.set(2, 1);
        o.set(1, 1);
        assert_eq!(o.get(1), Some(1));
        o.undo(m);
        assert_eq!(o.get(1), Some(0));
        assert_eq!(o.get(2), None);
    }

    #[test]
    fn pinview_shares_prefix() {
        let base = PinView::new().with(3, 1);
        let a = base.with(4, 0);
        let b = base.with(4, 1).with(3, 0);
        assert_eq!(a.get(3), Some(1));
        assert_eq!(b.get(3), Some(0));
        assert_eq!(b.get(4), Some(1));
        assert_eq!(base.get(4), None);
        assert_eq!(b.deltas(), vec![(4, 1), (3, 0)]);
    }
}
