//! Seeded random streams and binomial/multinomial sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::models::{Polymer, PolymerModel};

/// Replayable random stream. Child streams are keyed by (seed, stream, label)
/// so parallel tasks can draw independently without sharing state.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; does not advance `self`.
    pub fn derive(&self, label: u64) -> RngStream {
        let seed = splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self::with_stream(seed, label)
    }

    pub fn derive_str(&self, label: &str) -> RngStream {
        self.derive(fnv1a(label.as_bytes()))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Binomial sampler with a declared capacity. Draws are exact up to the
/// double-precision arithmetic of the underlying inversion/BTPE sampler.
#[derive(Debug, Clone, Copy)]
pub struct BinomialOracle {
    capacity: u64,
}

impl BinomialOracle {
    pub fn new(capacity: u64) -> Self {
        BinomialOracle { capacity }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: u64, p: f64, rng: &mut R) -> Result<u64> {
        sample_binomial(self, n, p, rng)
    }
}

pub fn sample_binomial<R: Rng + ?Sized>(oracle: &BinomialOracle, n: u64, p: f64, rng: &mut R) -> Result<u64> {
    if n > oracle.capacity {
        return Err(Error::Capacity { n, capacity: oracle.capacity });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("binomial p={p} outside [0,1]")));
    }
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    Ok(Binomial::new(n, p).expect("validated binomial parameters").sample(rng))
}

/// M(N; probs) by q-1 chained binomials.
pub fn sample_multinomial_dense<R: Rng + ?Sized>(
    oracle: &BinomialOracle,
    n: u64,
    probs: &[f64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    if let Some(&p) = probs.iter().find(|&&p| p < 0.0 || p.is_nan()) {
        return Err(Error::InvalidParams(format!("negative probability {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!("probabilities sum to {total}")));
    }
    let mut out = vec![0u64; probs.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = left;
            break;
        }
        let q = if mass <= 0.0 { 1.0 } else { (p / mass).min(1.0) };
        let x = sample_binomial(oracle, left, q, rng)?;
        out[i] = x;
        left -= x;
        mass -= p;
    }
    Ok(out)
}

/// Draws an index from a pmf that need not be normalized.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Multinomial M(N; ν_u) for the polymer proposal ν_u(γ) = w_γ on polymers
/// containing u, rest on ∅. Each draw gets a geometric size cutoff K with
/// P(K ≥ m) = e^{-rm}; given K = k it picks γ with |γ| ≤ k from the
/// reweighted sub-probability ν̃(γ) = w_γ e^{r|γ|}. Returns the polymer
/// counts (ordered by size, then vertices, then spins) and the ∅ count.
pub fn sample_polymer_multinomial<R: Rng + ?Sized>(
    model: &PolymerModel,
    u: usize,
    n: u64,
    rng: &mut R,
    oracle: &BinomialOracle,
) -> Result<(Vec<(Polymer, u64)>, u64)> {
    if n == 0 {
        return Ok((Vec::new(), 0));
    }
    let r = model.rate();
    if !(r > 0.0) {
        return Err(Error::Regime(format!("polymer cutoff rate r = {r:.4} must be positive; theta too small")));
    }
    let stop = 1.0 - (-r).exp();
    // counts[k] = number of draws with cutoff exactly k
    let mut counts = Vec::new();
    let mut left = n;
    while left > 0 {
        let x = sample_binomial(oracle, left, stop, rng)?;
        counts.push(x);
        left -= x;
    }
    let kmax = counts.len() - 1;
    let mut empty = counts[0];
    if kmax == 0 {
        return Ok((Vec::new(), empty));
    }
    let polys = model.polymers_containing(u, kmax);
    let tilde: Vec<f64> = polys.iter().map(|(p, w)| w * (r * p.len() as f64).exp()).collect();
    let mut tally: Vec<u64> = vec![0; polys.len()];
    for (k, &m) in counts.iter().enumerate().skip(1) {
        if m == 0 {
            continue;
        }
        let upto = polys.partition_point(|(p, _)| p.len() <= k);
        let mass: f64 = tilde[..upto].iter().sum();
        if mass > 1.0 + 1e-12 {
            return Err(Error::Regime(format!("reweighted polymer mass {mass:.6} exceeds 1 at size {k}")));
        }
        let mut probs = tilde[..upto].to_vec();
        probs.push((1.0 - mass).max(0.0));
        let norm: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= norm);
        let draw = sample_multinomial_dense(oracle, m, &probs, rng)?;
        for (i, &c) in draw[..upto].iter().enumerate() {
            tally[i] += c;
        }
        empty += draw[upto];
    }
    let out = polys.into_iter().zip(tally).filter(|&(_, c)| c > 0).map(|((p, _), c)| (p, c)).collect();
    Ok((out, empty))
}
