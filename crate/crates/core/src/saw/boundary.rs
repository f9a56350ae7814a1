//! Budgeted truncation of a rooted tree into a boundary antichain.

use super::walk::SawCursor;

/// Navigation over a rooted tree; a position is the current node.
pub trait RootedTree {
    fn child_count(&mut self) -> usize;
    /// Move to child `i`, `i < child_count()`.
    fn descend(&mut self, i: usize);
    fn ascend(&mut self);
}

impl RootedTree for SawCursor<'_> {
    fn child_count(&mut self) -> usize {
        self.free_children().len()
    }

    fn descend(&mut self, i: usize) {
        let u = self.free_children()[i];
        self.step(u).expect("free child is steppable");
    }

    fn ascend(&mut self) {
        self.back();
    }
}

/// Tree where every node has `arity` children down to `height` (unbounded
/// if `None`).
#[derive(Debug, Clone)]
pub struct CompleteTree {
    pub arity: usize,
    pub height: Option<usize>,
    depth: usize,
}

impl CompleteTree {
    pub fn new(arity: usize, height: Option<usize>) -> Self {
        CompleteTree { arity, height, depth: 0 }
    }
}

impl RootedTree for CompleteTree {
    fn child_count(&mut self) -> usize {
        match self.height {
            Some(h) if self.depth >= h => 0,
            _ => self.arity,
        }
    }

    fn descend(&mut self, _: usize) {
        self.depth += 1;
    }

    fn ascend(&mut self) {
        self.depth -= 1;
    }
}

/// Boundary nodes as child-index paths from the root, in discovery order.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BoundarySet {
    pub paths: Vec<Vec<u32>>,
    /// Longest path length.
    pub depth: usize,
    /// Nodes visited by the truncation, the tree size above the boundary.
    pub size: usize,
}

impl BoundarySet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// No path is a prefix of another.
    pub fn is_antichain(&self) -> bool {
        let mut p = self.paths.clone();
        p.sort();
        p.windows(2).all(|w| !w[1].starts_with(&w[0]))
    }
}

/// A node is kept once its budget drops to 1; otherwise the budget is split
/// as N(1-δ)/d over its d children. Leaves above that contribute nothing.
pub fn boundary<T: RootedTree + ?Sized>(tree: &mut T, delta: f64, budget: f64) -> BoundarySet {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    let mut out = BoundarySet { paths: Vec::new(), depth: 0, size: 0 };
    let mut path = Vec::new();
    walk(tree, delta, budget, &mut path, &mut out);
    out
}

fn walk<T: RootedTree + ?Sized>(tree: &mut T, delta: f64, n: f64, path: &mut Vec<u32>, out: &mut BoundarySet) {
    out.size += 1;
    if n <= 1.0 {
        out.depth = out.depth.max(path.len());
        out.paths.push(path.clone());
        return;
    }
    let d = tree.child_count();
    let share = n * (1.0 - delta) / d as f64;
    for i in 0..d {
        tree.descend(i);
        path.push(i as u32);
        walk(tree, delta, share, path, out);
        path.pop();
        tree.ascend();
    }
}

/// x = log(1/(1-δ)) / log(Δ/(1-δ)).
pub fn boundary_exponent(max_degree: usize, delta: f64) -> f64 {
    let d = max_degree as f64;
    (1.0 / (1.0 - delta)).ln() / (d / (1.0 - delta)).ln()
}

/// Δ N^(1-x): the largest boundary any tree of degree Δ can produce.
pub fn boundary_size_bound(max_degree: usize, delta: f64, budget: f64) -> f64 {
    max_degree as f64 * budget.powf(1.0 - boundary_exponent(max_degree, delta))
}

/// 1 + log N / log((Δ-1)/(1-δ)).
pub fn boundary_depth_bound(max_degree: usize, delta: f64, budget: f64) -> f64 {
    1.0 + budget.ln() / ((max_degree as f64 - 1.0) / (1.0 - delta)).ln()
}

/// Depth bound valid for any tree: a node with one free child still shrinks
/// the budget by 1-δ, so the base degrades to 1/(1-δ).
pub fn boundary_depth_bound_any(delta: f64, budget: f64) -> f64 {
    1.0 + budget.ln() / (1.0 / (1.0 - delta)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_hand_trace() {
        let s = boundary(&mut CompleteTree::new(2, None), 0.5, 4.0);
        assert_eq!(s.paths, vec![vec![0], vec![1]]);
        assert_eq!(s.size, 3);
        assert!(s.is_antichain());
    }

    #[test]
    fn unit_budget_is_root() {
        let s = boundary(&mut CompleteTree::new(3, None), 0.3, 1.0);
        assert_eq!(s.paths, vec![Vec::<u32>::new()]);
    }

    #[test]
    fn leaves_above_budget_vanish() {
        let s = boundary(&mut CompleteTree::new(3, Some(1)), 0.3, 100.0);
        assert!(s.is_empty());
        assert_eq!(s.size, 4);
    }

    #[test]
    fn antichain_detection() {
        let s = BoundarySet { paths: vec![vec![0], vec![0, 1]], depth: 2, size: 0 };
        assert!(!s.is_antichain());
    }
}
