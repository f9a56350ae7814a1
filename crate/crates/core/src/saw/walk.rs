//! Self-avoiding walks with the derived graph kept incrementally.
//!
//! Stepping from tip t to u removes t and, for every other live unpinned
//! neighbor x of t, adds a copy of t pinned to 1[x > u] and attached to x.
//! Copies toward pinned neighbors are skipped: the edge between two pinned
//! vertices is a constant factor of the conditional law.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, Pinning, Spin, VertexOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyVertex {
    pub of: usize,
    pub at: usize,
    pub pin: Spin,
}

/// A vertex of the derived graph G^w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derived {
    Orig(usize),
    Copy(usize),
}

/// A SAW-tree child of the tip. Pinned children are leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SawChild {
    pub node: Derived,
    pub pin: Option<Spin>,
}

#[derive(Debug, Clone)]
enum Undo {
    Move { prev: usize, copies_before: usize, touched: Vec<usize> },
    Collapse,
}

#[derive(Debug, Clone)]
pub struct SawWalk<'a> {
    graph: &'a Graph,
    tau: &'a Pinning,
    order: Option<&'a VertexOrder>,
    walk: Vec<usize>,
    removed: HashSet<usize>,
    copies: Vec<CopyVertex>,
    attached: HashMap<usize, Vec<usize>>,
    collapsed: Option<Spin>,
    /// Elementary operations, for cost instrumentation.
    pub ops: u64,
}

impl<'a> SawWalk<'a> {
    pub fn new(graph: &'a Graph, tau: &'a Pinning, root: usize) -> Self {
        SawWalk {
            graph,
            tau,
            order: None,
            walk: vec![root],
            removed: HashSet::new(),
            copies: Vec::new(),
            attached: HashMap::new(),
            collapsed: tau.get(root),
            ops: 0,
        }
    }

    pub fn with_order(mut self, order: &'a VertexOrder) -> Self {
        self.order = Some(order);
        self
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn tau(&self) -> &'a Pinning {
        self.tau
    }

    pub fn vertices(&self) -> &[usize] {
        &self.walk
    }

    pub fn tip(&self) -> usize {
        *self.walk.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Pin of the collapsed singleton, if the last step hit a pinned vertex.
    pub fn collapsed(&self) -> Option<Spin> {
        self.collapsed
    }

    pub fn copies(&self) -> &[CopyVertex] {
        &self.copies
    }

    pub fn is_removed(&self, x: usize) -> bool {
        self.removed.contains(&x)
    }

    fn greater(&self, a: usize, b: usize) -> bool {
        match self.order {
            Some(o) => o.less(b, a),
            None => a > b,
        }
    }

    /// Neighbors of a vertex of G^w, originals first in id order, then
    /// attached copies in creation order.
    pub fn derived_neighbors(&mut self, y: Derived, out: &mut Vec<Derived>) {
        out.clear();
        match y {
            Derived::Orig(x) => {
                for &z in self.graph.neighbors(x) {
                    self.ops += 1;
                    if !self.removed.contains(&z) {
                        out.push(Derived::Orig(z));
                    }
                }
                if let Some(cs) = self.attached.get(&x) {
                    self.ops += cs.len() as u64;
                    out.extend(cs.iter().map(|&i| Derived::Copy(i)));
                }
            }
            Derived::Copy(i) => {
                self.ops += 1;
                let at = self.copies[i].at;
                if !self.removed.contains(&at) {
                    out.push(Derived::Orig(at));
                }
            }
        }
    }

    pub fn derived_pin(&self, y: Derived) -> Option<Spin> {
        match y {
            Derived::Orig(x) => self.tau.get(x),
            Derived::Copy(i) => Some(self.copies[i].pin),
        }
    }

    /// SAW-tree children of the tip; empty once collapsed.
    pub fn children(&mut self) -> Vec<SawChild> {
        if self.collapsed.is_some() {
            return Vec::new();
        }
        let mut nb = Vec::new();
        self.derived_neighbors(Derived::Orig(self.tip()), &mut nb);
        nb.into_iter().map(|node| SawChild { node, pin: self.derived_pin(node) }).collect()
    }

    fn step_logged(&mut self, u: usize) -> Result<Undo> {
        if self.collapsed.is_some() {
            return Err(Error::InvalidParams("cannot extend a collapsed walk".into()));
        }
        let t = self.tip();
        if !self.graph.has_edge(t, u) || self.removed.contains(&u) {
            return Err(Error::InvalidParams(format!("{u} is not adjacent to the tip {t} of the walk")));
        }
        if let Some(c) = self.tau.get(u) {
            self.walk.push(u);
            self.collapsed = Some(c);
            return Ok(Undo::Collapse);
        }
        let copies_before = self.copies.len();
        let mut touched = Vec::new();
        for &x in self.graph.neighbors(t) {
            self.ops += 1;
            if x == u || self.removed.contains(&x) || self.tau.get(x).is_some() {
                continue;
            }
            let pin = self.greater(x, u) as Spin;
            self.attached.entry(x).or_default().push(self.copies.len());
            self.copies.push(CopyVertex { of: t, at: x, pin });
            touched.push(x);
        }
        self.removed.insert(t);
        self.walk.push(u);
        Ok(Undo::Move { prev: t, copies_before, touched })
    }

    fn undo(&mut self, entry: Undo) {
        self.walk.pop();
        match entry {
            Undo::Collapse => self.collapsed = None,
            Undo::Move { prev, copies_before, touched } => {
                for x in touched {
                    self.ops += 1;
                    let list = self.attached.get_mut(&x).unwrap();
                    list.pop();
                    if list.is_empty() {
                        self.attached.remove(&x);
                    }
                }
                self.copies.truncate(copies_before);
                self.removed.remove(&prev);
            }
        }
    }
}

/// Functional step: the extended walk, leaving `walk` untouched.
pub fn saw_step<'a>(walk: &SawWalk<'a>, u: usize) -> Result<SawWalk<'a>> {
    let mut w = walk.clone();
    w.step_logged(u)?;
    Ok(w)
}

/// A walk plus an undo journal: moves down the SAW tree and back.
#[derive(Debug, Clone)]
pub struct SawCursor<'a> {
    walk: SawWalk<'a>,
    journal: Vec<Undo>,
}

impl<'a> SawCursor<'a> {
    pub fn new(graph: &'a Graph, tau: &'a Pinning, root: usize) -> Self {
        SawCursor { walk: SawWalk::new(graph, tau, root), journal: Vec::new() }
    }

    pub fn with_order(graph: &'a Graph, tau: &'a Pinning, root: usize, order: &'a VertexOrder) -> Self {
        SawCursor { walk: SawWalk::new(graph, tau, root).with_order(order), journal: Vec::new() }
    }

    pub fn walk(&self) -> &SawWalk<'a> {
        &self.walk
    }

    pub fn walk_mut(&mut self) -> &mut SawWalk<'a> {
        &mut self.walk
    }

    pub fn depth(&self) -> usize {
        self.journal.len()
    }

    pub fn ops(&self) -> u64 {
        self.walk.ops
    }

    pub fn children(&mut self) -> Vec<SawChild> {
        self.walk.children()
    }

    /// Unpinned children, the ones the walk can move into.
    pub fn free_children(&mut self) -> Vec<usize> {
        self.children()
            .into_iter()
            .filter_map(|c| match (c.node, c.pin) {
                (Derived::Orig(x), None) => Some(x),
                _ => None,
            })
            .collect()
    }

    pub fn step(&mut self, u: usize) -> Result<()> {
        let e = self.walk.step_logged(u)?;
        self.journal.push(e);
        Ok(())
    }

    /// Undo the last step; false at the root.
    pub fn back(&mut self) -> bool {
        match self.journal.pop() {
            Some(e) => {
                self.walk.undo(e);
                true
            }
            None => false,
        }
    }

    pub fn reset(&mut self) {
        while self.back() {}
    }

    /// Move to the node whose walk is `target`, undoing only past the common
    /// prefix with the current walk.
    pub fn goto(&mut self, target: &[usize]) -> Result<()> {
        if target.first() != self.walk.walk.first() {
            return Err(Error::InvalidParams("walk has a different root".into()));
        }
        let common = self.walk.walk.iter().zip(target).take_while(|(a, b)| a == b).count();
        while self.walk.len() > common {
            self.back();
        }
        for &u in &target[common..] {
            self.step(u)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_step_copies() {
        let g = Graph::complete(3);
        let tau = Pinning::new();
        let w = SawWalk::new(&g, &tau, 0);
        let w1 = saw_step(&w, 1).unwrap();
        assert!(w1.is_removed(0));
        assert_eq!(w1.copies(), &[CopyVertex { of: 0, at: 2, pin: 1 }]);
        assert!(saw_step(&w1, 0).is_err());
        assert_eq!(w.copies().len(), 0);
    }

    #[test]
    fn path_step_copies() {
        let g = Graph::path(3);
        let tau = Pinning::new();
        let w = saw_step(&SawWalk::new(&g, &tau, 1), 0).unwrap();
        assert_eq!(w.copies(), &[CopyVertex { of: 1, at: 2, pin: 1 }]);
        let mut w = w;
        assert!(w.children().is_empty());
    }

    #[test]
    fn pinned_step_collapses() {
        let g = Graph::path(3);
        let tau = Pinning::from_pairs([(1, 0)]);
        let mut c = SawCursor::new(&g, &tau, 0);
        assert!(c.free_children().is_empty());
        assert_eq!(c.children(), vec![SawChild { node: Derived::Orig(1), pin: Some(0) }]);
        c.step(1).unwrap();
        assert_eq!(c.walk().collapsed(), Some(0));
        assert!(c.children().is_empty());
        assert!(c.step(2).is_err());
        assert!(c.back());
        assert_eq!(c.walk().collapsed(), None);
    }

    #[test]
    fn undo_restores_state() {
        let g = Graph::complete(4);
        let tau = Pinning::new();
        let mut c = SawCursor::new(&g, &tau, 0);
        let before = c.children();
        c.goto(&[0, 2, 1, 3]).unwrap();
        // the copies of 0 and of 2 hang at 3; every original neighbor is gone
        let ch = c.children();
        assert!(ch.iter().all(|x| x.pin.is_some()));
        assert_eq!(ch.len(), 2);
        c.goto(&[0, 1]).unwrap();
        assert_eq!(c.walk().copies().len(), 2);
        c.reset();
        assert_eq!(c.children(), before);
        assert!(c.walk().copies().is_empty());
    }
}
