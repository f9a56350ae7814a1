//! Graphs, hypergraphs, pinnings and connected-subgraph enumeration.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub type Spin = u8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    max_degree: usize,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            let line = i + 2;
            if u >= n || v >= n {
                return Err(Error::Parse { line, msg: format!("vertex out of range 0..{n}") });
            }
            if u == v {
                return Err(Error::SelfLoop { line, v: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge { line, u, v });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Graph { adj, max_degree })
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = content_lines(text);
        let (hl, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing vertex count".into() })?;
        let n = parse_ints(hl, header, Some(1))?[0];
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        for (line, s) in lines {
            let t = parse_ints(line, s, Some(2))?;
            let (u, v) = (t[0], t[1]);
            if u >= n || v >= n {
                return Err(Error::Parse { line, msg: format!("vertex out of range 0..{n}") });
            }
            if u == v {
                return Err(Error::SelfLoop { line, v: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge { line, u, v });
            }
            edges.push((u, v));
        }
        Graph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as (u, v) with u < v, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            out.extend(a.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    pub fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            e.push((0, n - 1));
        }
        Graph::from_edges(n, &e).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    /// Random d-regular graph from the configuration model, rejecting
    /// pairings with loops or multi-edges.
    pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
        if n * d % 2 != 0 || d >= n {
            return Err(Error::InvalidParams(format!("no {d}-regular graph on {n} vertices")));
        }
        'retry: for _ in 0..10_000 {
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
            stubs.shuffle(rng);
            let mut seen = HashSet::new();
            let mut edges = Vec::with_capacity(n * d / 2);
            for p in stubs.chunks(2) {
                let (u, v) = (p[0].min(p[1]), p[0].max(p[1]));
                if u == v || !seen.insert((u, v)) {
                    continue 'retry;
                }
                edges.push((u, v));
            }
            return Graph::from_edges(n, &edges);
        }
        Err(Error::InvalidParams("configuration model kept producing multi-edges".into()))
    }
}

/// k-uniform hypergraph. Conditioning on a pinning can shrink edges, so
/// derived hypergraphs may carry edges smaller than `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    max_degree: usize,
}

impl Hypergraph {
    pub fn new(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Hypergraph> {
        let mut clean = Vec::with_capacity(edges.len());
        let mut seen = HashSet::new();
        for (i, mut e) in edges.into_iter().enumerate() {
            let line = i + 2;
            e.sort_unstable();
            if e.iter().any(|&v| v >= n) {
                return Err(Error::Parse { line, msg: format!("vertex out of range 0..{n}") });
            }
            if let Some(w) = e.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::SelfLoop { line, v: w[0] });
            }
            if e.len() != k {
                return Err(Error::Parse { line, msg: format!("expected {k} vertices, got {}", e.len()) });
            }
            if !seen.insert(e.clone()) {
                return Err(Error::DuplicateEdge { line, u: e[0], v: e[1] });
            }
            clean.push(e);
        }
        Ok(Self::build(n, k, clean))
    }

    fn build(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Hypergraph {
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[v].push(i);
            }
        }
        let max_degree = incidence.iter().map(Vec::len).max().unwrap_or(0);
        Hypergraph { n, k, edges, incidence, max_degree }
    }

    pub fn parse(text: &str) -> Result<Hypergraph> {
        let mut lines = content_lines(text);
        let (hl, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header \"n k\"".into() })?;
        let h = parse_ints(hl, header, Some(2))?;
        let (n, k) = (h[0], h[1]);
        let mut edges = Vec::new();
        let mut lines_of = Vec::new();
        for (line, s) in lines {
            edges.push(parse_ints(line, s, Some(k))?);
            lines_of.push(line);
        }
        // re-map error line numbers from edge index to file line
        Hypergraph::new(n, k, edges).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse { line: lines_of[line - 2], msg },
            Error::SelfLoop { line, v } => Error::SelfLoop { line: lines_of[line - 2], v },
            Error::DuplicateEdge { line, u, v } => Error::DuplicateEdge { line: lines_of[line - 2], u, v },
            other => other,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Independent-set constraints after pinning: edges touching a vertex
    /// pinned to 0 are satisfied and dropped, vertices pinned to 1 are removed
    /// from their edges. An edge that becomes empty makes the pinning infeasible.
    pub fn condition(&self, pinning: &Pinning) -> Result<Hypergraph> {
        let mut edges = Vec::new();
        for e in &self.edges {
            if e.iter().any(|&v| pinning.get(v) == Some(0)) {
                continue;
            }
            let rest: Vec<usize> = e.iter().copied().filter(|&v| pinning.get(v).is_none()).collect();
            if rest.is_empty() {
                return Err(Error::Infeasible);
            }
            edges.push(rest);
        }
        Ok(Self::build(self.n, self.k, edges))
    }

    pub fn is_independent(&self, sigma: &[Spin]) -> bool {
        self.edges.iter().all(|e| e.iter().any(|&v| sigma[v] == 0))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_ints(line: usize, s: &str, expect: Option<usize>) -> Result<Vec<usize>> {
    let vals = s
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse { line, msg: format!("{e}: {s:?}") })?;
    if let Some(k) = expect {
        if vals.len() != k {
            return Err(Error::Parse { line, msg: format!("expected {k} integers, got {}", vals.len()) });
        }
    }
    Ok(vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    HyperList,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Loaded {
    Graph(Graph),
    Hyper(Hypergraph),
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<Loaded> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    match format {
        GraphFormat::EdgeList => Graph::parse_edge_list(&text).map(Loaded::Graph),
        GraphFormat::HyperList => Hypergraph::parse(&text).map(Loaded::Hyper),
    }
}

/// Partial configuration; sparse map vertex -> spin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Pinning {
    map: BTreeMap<usize, Spin>,
}

impl Pinning {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Spin)>) -> Self {
        Pinning { map: pairs.into_iter().collect() }
    }

    /// Pins every vertex of `set` to 0.
    pub fn zeros(set: &[usize]) -> Self {
        Self::from_pairs(set.iter().map(|&v| (v, 0)))
    }

    pub fn get(&self, v: usize) -> Option<Spin> {
        self.map.get(&v).copied()
    }

    pub fn set(&mut self, v: usize, c: Spin) {
        self.map.insert(v, c);
    }

    pub fn with(&self, v: usize, c: Spin) -> Self {
        let mut p = self.clone();
        p.set(v, c);
        p
    }

    pub fn remove(&mut self, v: usize) -> Option<Spin> {
        self.map.remove(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Spin)> + '_ {
        self.map.iter().map(|(&v, &c)| (v, c))
    }
}

/// Total order on vertices used by the SAW construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    rank: Vec<usize>,
}

impl VertexOrder {
    pub fn identity(n: usize) -> Self {
        VertexOrder { rank: (0..n).collect() }
    }

    /// `perm[i]` is the vertex placed at position i.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let mut rank = vec![usize::MAX; perm.len()];
        for (i, &v) in perm.iter().enumerate() {
            if v >= perm.len() || rank[v] != usize::MAX {
                return Err(Error::InvalidParams("vertex order is not a permutation".into()));
            }
            rank[v] = i;
        }
        Ok(VertexOrder { rank })
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }
}

/// Every connected vertex set of size at most `k` that contains `u`, each
/// exactly once, as sorted vectors.
pub fn enumerate_connected_subgraphs(g: &Graph, u: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut sub = vec![u];
    let mut excluded = vec![false; g.n()];
    let cand: Vec<usize> = g.neighbors(u).to_vec();
    extend(g, k, &mut sub, cand, &mut excluded, &mut out);
    out
}

// Branch on the candidate frontier: pick cand[i], forbid cand[..i] for the
// rest of this branch. Every connected set has exactly one decision path.
fn extend(
    g: &Graph,
    k: usize,
    sub: &mut Vec<usize>,
    cand: Vec<usize>,
    excluded: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let mut s = sub.clone();
    s.sort_unstable();
    out.push(s);
    if sub.len() == k {
        return;
    }
    for i in 0..cand.len() {
        let w = cand[i];
        let mut next: Vec<usize> = cand[i + 1..].to_vec();
        for &x in g.neighbors(w) {
            if !excluded[x] && !sub.contains(&x) && !cand.contains(&x) && !next.contains(&x) {
                next.push(x);
            }
        }
        sub.push(w);
        extend(g, k, sub, next, excluded, out);
        sub.pop();
        excluded[w] = true;
    }
    for &w in &cand {
        excluded[w] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_path_and_triangle() {
        let p = Graph::parse_edge_list("3\n0 1\n1 2").unwrap();
        assert_eq!(p.max_degree(), 2);
        assert_eq!(p.neighbors(1), &[0, 2]);
        let k = Graph::parse_edge_list("3\n0 1\n1 2\n0 2").unwrap();
        assert_eq!(k.num_edges(), 3);
        assert_eq!(k.max_degree(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Graph::parse_edge_list("3\n0 0"), Err(Error::SelfLoop { line: 2, v: 0 })));
        assert!(matches!(
            Graph::parse_edge_list("3\n0 1\n1 0"),
            Err(Error::DuplicateEdge { line: 3, .. })
        ));
        assert!(matches!(Graph::parse_edge_list("3\n0 x"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Graph::parse_edge_list("2\n0 5"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Hypergraph::parse("4 3\n0 1 2\n0 1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(Hypergraph::parse("4 3\n0 1 1"), Err(Error::SelfLoop { line: 2, .. })));
    }

    #[test]
    fn hypergraph_basics() {
        let h = Hypergraph::parse("6 4\n0 1 2 3\n2 3 4 5").unwrap();
        assert_eq!(h.max_degree(), 2);
        assert_eq!(h.incident(2), &[0, 1]);
        let c = h.condition(&Pinning::from_pairs([(0, 0), (4, 1)])).unwrap();
        assert_eq!(c.edges(), &[vec![2, 3, 5]]);
    }

    #[test]
    fn enumeration_small_cases() {
        let k3 = Graph::complete(3);
        let mut got = enumerate_connected_subgraphs(&k3, 0, 2);
        got.sort();
        assert_eq!(got, vec![vec![0], vec![0, 1], vec![0, 2]]);
        let p3 = Graph::path(3);
        let mut got = enumerate_connected_subgraphs(&p3, 0, 3);
        got.sort();
        assert_eq!(got, vec![vec![0], vec![0, 1], vec![0, 1, 2]]);
        let empty = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(enumerate_connected_subgraphs(&empty, 0, 4), vec![vec![0]]);
    }

    #[test]
    fn vertex_order() {
        let o = VertexOrder::from_permutation(&[2, 0, 1]).unwrap();
        assert!(o.less(2, 0) && o.less(0, 1));
        assert!(VertexOrder::from_permutation(&[0, 0]).is_err());
    }
}
