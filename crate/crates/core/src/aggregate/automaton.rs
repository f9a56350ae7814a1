use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::rng::{sample_multinomial_dense, BinomialOracle, RngStream};

/// Absolute level cap when no decay parameters are known.
pub const LEVEL_CAP_DEFAULT: u64 = 1_000_000;

/// Probabilistic automaton with bounded branching. States are ordered so
/// level maps iterate deterministically.
pub trait Automaton {
    type State: Clone + Ord + Debug;

    fn initial(&self) -> Self::State;
    fn is_absorbing(&self, s: &Self::State) -> bool;
    /// Successor distribution; probabilities sum to 1, at most `width` entries.
    fn transitions(&self, s: &Self::State) -> Vec<(Self::State, f64)>;
    fn width(&self) -> usize;
    /// (C, α) with P(run length ≥ t) ≤ C α^t, when known.
    fn decay(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct BatchOutput<S> {
    pub absorbed: BTreeMap<S, u64>,
    /// Number of occupied states at each level.
    pub occupancy: Vec<usize>,
}

/// 64·log_{D/α}(CN) when (C, α) is known, else the absolute default.
pub fn level_cap(width: usize, decay: Option<(f64, f64)>, n: u64) -> u64 {
    match decay {
        Some((c, alpha)) if alpha > 0.0 && alpha < 1.0 => {
            let base = (width.max(1) as f64 / alpha).ln();
            let v = 64.0 * (c * n.max(1) as f64).ln().max(1.0) / base;
            v.ceil().max(64.0) as u64
        }
        _ => LEVEL_CAP_DEFAULT,
    }
}

/// Absorbing-state histogram of N independent runs, advanced level by level:
/// each occupied state's count is split by a multinomial over its successors.
pub fn automaton_batch<A: Automaton>(
    spec: &A,
    n: u64,
    rng: &mut RngStream,
    oracle: &BinomialOracle,
) -> Result<BatchOutput<A::State>> {
    let mut absorbed = BTreeMap::new();
    let mut occupancy = Vec::new();
    if n == 0 {
        return Ok(BatchOutput { absorbed, occupancy });
    }
    let cap = level_cap(spec.width(), spec.decay(), n);
    let mut level: BTreeMap<A::State, u64> = BTreeMap::new();
    level.insert(spec.initial(), n);
    let mut t = 0u64;
    loop {
        let mut next: BTreeMap<A::State, u64> = BTreeMap::new();
        for (s, m) in std::mem::take(&mut level) {
            if spec.is_absorbing(&s) {
                *absorbed.entry(s).or_insert(0) += m;
                continue;
            }
            let succ = spec.transitions(&s);
            debug_assert!(succ.len() <= spec.width());
            let probs: Vec<f64> = succ.iter().map(|(_, p)| *p).collect();
            let counts = if succ.len() == 1 { vec![m] } else { sample_multinomial_dense(oracle, m, &probs, rng)? };
            for ((s2, _), c) in succ.into_iter().zip(counts) {
                if c > 0 {
                    *next.entry(s2).or_insert(0) += c;
                }
            }
        }
        if next.is_empty() {
            return Ok(BatchOutput { absorbed, occupancy });
        }
        occupancy.push(next.len());
        level = next;
        t += 1;
        if t > cap {
            return Err(Error::LevelCap { cap });
        }
    }
}

/// One run, choosing successors by inversion of a single uniform at each
/// branching step. Returns the absorbing state and the number of steps.
pub fn automaton_run<A: Automaton>(spec: &A, rng: &mut RngStream) -> Result<(A::State, u64)> {
    let mut s = spec.initial();
    let mut steps = 0;
    while !spec.is_absorbing(&s) {
        let succ = spec.transitions(&s);
        s = if succ.len() == 1 {
            succ.into_iter().next().unwrap().0
        } else {
            let r = rng.uniform();
            let mut acc = 0.0;
            let last = succ.len() - 1;
            let mut pick = None;
            for (i, (s2, p)) in succ.into_iter().enumerate() {
                acc += p;
                if r < acc || i == last {
                    pick = Some(s2);
                    break;
                }
            }
            pick.unwrap()
        };
        steps += 1;
        if steps > LEVEL_CAP_DEFAULT {
            return Err(Error::LevelCap { cap: LEVEL_CAP_DEFAULT });
        }
    }
    Ok((s, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flip a p-coin: heads and tails both absorb.
    struct Coin(f64);

    impl Automaton for Coin {
        type State = u8;
        fn initial(&self) -> u8 {
            0
        }
        fn is_absorbing(&self, s: &u8) -> bool {
            *s > 0
        }
        fn transitions(&self, _: &u8) -> Vec<(u8, f64)> {
            vec![(1, self.0), (2, 1.0 - self.0)]
        }
        fn width(&self) -> usize {
            2
        }
    }

    struct Absorbed;

    impl Automaton for Absorbed {
        type State = u8;
        fn initial(&self) -> u8 {
            9
        }
        fn is_absorbing(&self, _: &u8) -> bool {
            true
        }
        fn transitions(&self, _: &u8) -> Vec<(u8, f64)> {
            unreachable!()
        }
        fn width(&self) -> usize {
            1
        }
    }

    #[test]
    fn initial_absorbing() {
        let out = automaton_batch(&Absorbed, 7, &mut RngStream::new(1), &BinomialOracle::new(7)).unwrap();
        assert_eq!(out.absorbed.into_iter().collect::<Vec<_>>(), vec![(9, 7)]);
    }

    #[test]
    fn coin_conserves_mass() {
        let out = automaton_batch(&Coin(0.5), 10_000, &mut RngStream::new(1), &BinomialOracle::new(10_000)).unwrap();
        assert_eq!(out.absorbed.values().sum::<u64>(), 10_000);
        assert_eq!(out.occupancy, vec![2]);
        let out = automaton_batch(&Coin(0.5), 0, &mut RngStream::new(1), &BinomialOracle::new(1)).unwrap();
        assert!(out.absorbed.is_empty());
    }

    #[test]
    fn cap_formula() {
        assert_eq!(level_cap(2, None, 10), LEVEL_CAP_DEFAULT);
        let c = level_cap(2, Some((1.0, 0.5)), 1 << 20);
        assert_eq!(c, (64.0 * (2f64.powi(20)).ln() / 4f64.ln()).ceil() as u64);
    }
}
