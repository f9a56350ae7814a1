//! Fixed small instances for the oracle-equivalence suites.

use std::collections::BTreeSet;

use crate::graph::{Graph, Hypergraph};
use crate::models::PolymerModel;

/// Every connected graph on 1..=max_n vertices with degree ≤ max_degree, one
/// per isomorphism class, as canonical edge lists. Brute force over edge
/// subsets and vertex permutations, so max_n ≤ 7.
pub fn connected_graphs(max_n: usize, max_degree: usize) -> Vec<Graph> {
    assert!(max_n <= 7, "canonical search is factorial in n");
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            let mut deg = vec![0; n];
            for &(u, v) in &edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            if deg.iter().any(|&d| d > max_degree) {
                continue;
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    let mut e: Vec<(usize, usize)> =
                        edges.iter().map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v]))).collect();
                    e.sort_unstable();
                    e
                })
                .min()
                .unwrap();
            if seen.insert(canon.clone()) {
                out.push(Graph::from_edges(n, &canon).unwrap());
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap(n, &mut p, &mut out);
    out
}

fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap(k - 1, p, out);
        let j = if k % 2 == 0 { i } else { 0 };
        p.swap(j, k - 1);
    }
}

/// Three polymer instances: P3 (q=2, θ=6), the star K_{1,3} (q=3, θ=5) and
/// C5 (q=2, θ=4). All sit below the C = 10 sampling threshold, so samplers
/// need the override on them.
pub fn polymer_instances() -> Vec<PolymerModel> {
    let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    vec![
        PolymerModel::geometric(Graph::path(3), 2, 6.0).unwrap(),
        PolymerModel::geometric(star, 3, 5.0).unwrap(),
        PolymerModel::geometric(Graph::cycle(5), 2, 4.0).unwrap(),
    ]
}

/// Two 4-uniform hypergraphs.
pub fn hypergraph_instances() -> Vec<Hypergraph> {
    vec![
        Hypergraph::new(6, 4, vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5]]).unwrap(),
        Hypergraph::new(7, 4, vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6], vec![0, 1, 5, 6]]).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_class_counts() {
        // connected graphs with at most 4 vertices: 1, 1, 2, 6
        assert_eq!(connected_graphs(4, 3).len(), 10);
        // on 5 vertices, 21 connected graphs; a degree-4 vertex plus any of the
        // 11 graphs on the other four accounts for 11 of them
        assert_eq!(connected_graphs(5, 3).len() - 10, 10);
        let six = connected_graphs(6, 3).len() - 20;
        assert_eq!(six, 29);
    }
}
