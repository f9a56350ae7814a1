//! The hardcore sampler and the hypergraph resolver as automata.

use std::collections::BTreeMap;

use crate::graph::{Graph, Hypergraph, Pinning, Spin};

use super::automaton::Automaton;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AjPhase {
    Init,
    Inspect,
    Hold(usize),
    Halt(Spin),
}

/// Call frame: vertex, its private Λ* additions (sorted) and phase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AjFrame {
    pub u: usize,
    pub lam: Vec<usize>,
    pub phase: AjPhase,
}

/// Stack machine for the hardcore sampler. Base pins: 0 joins Λ, a neighbor
/// pinned to 1 forces 0.
#[derive(Debug, Clone)]
pub struct AjAutomaton<'a> {
    pub graph: &'a Graph,
    pub lambda: f64,
    pub u: usize,
    pub pins: Pinning,
}

pub fn encode_aj_automaton<'a>(graph: &'a Graph, lambda: f64, u: usize, pins: Pinning) -> AjAutomaton<'a> {
    AjAutomaton { graph, lambda, u, pins }
}

impl AjAutomaton<'_> {
    fn in_lambda(&self, f: &AjFrame, v: usize) -> bool {
        self.pins.get(v).is_some() || f.lam.binary_search(&v).is_ok()
    }

    /// Tail on the number of steps, from the subcritical branching bound with
    /// c = 1 - λ(Δ-1): P(T ≥ t) ≤ exp(-c² t / (12 Δ²)).
    fn tail(&self) -> Option<(f64, f64)> {
        let d = self.graph.max_degree().max(1) as f64;
        let c = 1.0 - self.lambda * (d - 1.0);
        (c > 0.0).then(|| (1.0, (-c * c / (12.0 * d * d)).exp()))
    }
}

impl Automaton for AjAutomaton<'_> {
    type State = Vec<AjFrame>;

    fn initial(&self) -> Self::State {
        let phase = match self.pins.get(self.u) {
            Some(c) => AjPhase::Halt(c),
            None => AjPhase::Init,
        };
        vec![AjFrame { u: self.u, lam: vec![], phase }]
    }

    fn is_absorbing(&self, s: &Self::State) -> bool {
        s.len() == 1 && matches!(s[0].phase, AjPhase::Halt(_))
    }

    fn transitions(&self, s: &Self::State) -> Vec<(Self::State, f64)> {
        let top = s.last().expect("nonempty stack");
        let with_top = |f: AjFrame| {
            let mut st = s.clone();
            *st.last_mut().unwrap() = f;
            st
        };
        match top.phase {
            AjPhase::Init => {
                let p0 = 1.0 / (1.0 + self.lambda);
                vec![
                    (with_top(AjFrame { phase: AjPhase::Halt(0), ..top.clone() }), p0),
                    (with_top(AjFrame { phase: AjPhase::Inspect, ..top.clone() }), 1.0 - p0),
                ]
            }
            AjPhase::Inspect => {
                let nbrs = self.graph.neighbors(top.u);
                if nbrs.iter().any(|&v| self.pins.get(v) == Some(1)) {
                    return vec![(with_top(AjFrame { phase: AjPhase::Halt(0), ..top.clone() }), 1.0)];
                }
                match nbrs.iter().copied().find(|&v| !self.in_lambda(top, v)) {
                    None => vec![(with_top(AjFrame { phase: AjPhase::Halt(1), ..top.clone() }), 1.0)],
                    Some(v) => {
                        let mut st = with_top(AjFrame { phase: AjPhase::Hold(v), ..top.clone() });
                        // the child inherits the caller's Λ* by value
                        st.push(AjFrame { u: v, lam: top.lam.clone(), phase: AjPhase::Init });
                        vec![(st, 1.0)]
                    }
                }
            }
            AjPhase::Halt(b) => {
                let mut st = s.clone();
                st.pop();
                let parent = st.last_mut().expect("halted child has a caller");
                let AjPhase::Hold(v) = parent.phase else { unreachable!("caller must be holding") };
                if b == 1 {
                    parent.phase = AjPhase::Halt(0);
                } else {
                    let i = parent.lam.binary_search(&v).unwrap_err();
                    parent.lam.insert(i, v);
                    parent.phase = AjPhase::Inspect;
                }
                vec![(st, 1.0)]
            }
            AjPhase::Hold(_) => unreachable!("a holding frame is never on top"),
        }
    }

    fn width(&self) -> usize {
        2
    }

    fn decay(&self) -> Option<(f64, f64)> {
        self.tail()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HyperPhase {
    Start,
    /// Checking coins of edge `ei` (index into incident edges), j-th other vertex.
    Coins { ei: usize, j: usize },
    /// Resolving the j-th other vertex of edge `ei`.
    Resolve { ei: usize, j: usize },
    Wait { ei: usize, j: usize },
    Done(Spin),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperFrame {
    pub t: i64,
    pub phase: HyperPhase,
}

/// Call stack plus revealed coins and memo table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperState {
    pub stack: Vec<HyperFrame>,
    pub coins: BTreeMap<i64, Spin>,
    pub memo: BTreeMap<i64, Spin>,
}

#[derive(Debug, Clone)]
pub struct HyperAutomaton<'a> {
    pub h: &'a Hypergraph,
    pub v: usize,
}

pub fn encode_hypergraph_automaton(h: &Hypergraph, v: usize) -> HyperAutomaton<'_> {
    HyperAutomaton { h, v }
}

impl HyperAutomaton<'_> {
    fn n(&self) -> i64 {
        self.h.n() as i64
    }

    fn vertex_at(&self, t: i64) -> usize {
        t.rem_euclid(self.n()) as usize
    }

    fn others(&self, t: i64, ei: usize) -> Vec<i64> {
        let v = self.vertex_at(t);
        let e = &self.h.edges()[self.h.incident(v)[ei]];
        e.iter().filter(|&&u| u != v).map(|&u| t - (t - u as i64).rem_euclid(self.n())).collect()
    }

    fn reveal(&self, s: &HyperState, time: i64) -> Vec<(HyperState, f64)> {
        [0, 1]
            .into_iter()
            .map(|b| {
                let mut st = s.clone();
                st.coins.insert(time, b);
                (st, 0.5)
            })
            .collect()
    }
}

impl Automaton for HyperAutomaton<'_> {
    type State = HyperState;

    fn initial(&self) -> HyperState {
        HyperState {
            stack: vec![HyperFrame { t: self.v as i64 - self.n(), phase: HyperPhase::Start }],
            coins: BTreeMap::new(),
            memo: BTreeMap::new(),
        }
    }

    fn is_absorbing(&self, s: &HyperState) -> bool {
        s.stack.len() == 1 && matches!(s.stack[0].phase, HyperPhase::Done(_))
    }

    fn transitions(&self, s: &HyperState) -> Vec<(HyperState, f64)> {
        let top = s.stack.last().expect("nonempty stack").clone();
        let t = top.t;
        let step = |phase: HyperPhase, memo: Option<Spin>| {
            let mut st = s.clone();
            st.stack.last_mut().unwrap().phase = phase;
            if let Some(y) = memo {
                st.memo.insert(t, y);
            }
            vec![(st, 1.0)]
        };
        let n_edges = self.h.incident(self.vertex_at(t)).len();
        match top.phase {
            HyperPhase::Start => {
                if let Some(&y) = s.memo.get(&t) {
                    return step(HyperPhase::Done(y), None);
                }
                match s.coins.get(&t) {
                    None => self.reveal(s, t),
                    Some(0) => step(HyperPhase::Done(0), Some(0)),
                    Some(_) => step(HyperPhase::Coins { ei: 0, j: 0 }, None),
                }
            }
            HyperPhase::Coins { ei, j } => {
                if ei == n_edges {
                    return step(HyperPhase::Done(1), Some(1));
                }
                let others = self.others(t, ei);
                if j == others.len() {
                    return step(HyperPhase::Resolve { ei, j: 0 }, None);
                }
                match s.coins.get(&others[j]) {
                    None => self.reveal(s, others[j]),
                    Some(0) => step(HyperPhase::Coins { ei: ei + 1, j: 0 }, None),
                    Some(_) => step(HyperPhase::Coins { ei, j: j + 1 }, None),
                }
            }
            HyperPhase::Resolve { ei, j } => {
                let others = self.others(t, ei);
                if j == others.len() {
                    return step(HyperPhase::Done(0), Some(0));
                }
                let mut st = s.clone();
                st.stack.last_mut().unwrap().phase = HyperPhase::Wait { ei, j };
                st.stack.push(HyperFrame { t: others[j], phase: HyperPhase::Start });
                vec![(st, 1.0)]
            }
            HyperPhase::Done(y) => {
                let mut st = s.clone();
                st.stack.pop();
                let parent = st.stack.last_mut().expect("returning frame has a caller");
                let HyperPhase::Wait { ei, j } = parent.phase else { unreachable!("caller must be waiting") };
                parent.phase = if y == 1 { HyperPhase::Resolve { ei, j: j + 1 } } else { HyperPhase::Coins { ei: ei + 1, j: 0 } };
                vec![(st, 1.0)]
            }
            HyperPhase::Wait { .. } => unreachable!("a waiting frame is never on top"),
        }
    }

    fn width(&self) -> usize {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::automaton_run;
    use crate::rng::RngStream;

    #[test]
    fn isolated_vertex_is_one_coin() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let a = encode_aj_automaton(&g, 1.0, 0, Pinning::new());
        let succ = a.transitions(&a.initial());
        assert_eq!(succ.len(), 2);
        let inspect = &succ[1].0;
        let halt = a.transitions(inspect);
        assert_eq!(halt.len(), 1);
        assert!(a.is_absorbing(&halt[0].0));

        let h = Hypergraph::new(5, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let a = encode_hypergraph_automaton(&h, 4);
        let mut rng = RngStream::new(3);
        let (end, steps) = automaton_run(&a, &mut rng).unwrap();
        assert!(steps <= 3);
        assert_eq!(end.coins.len(), 1);
    }
}
