//! Chi-square tests and slope fits for the statistical suites.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn finish(stat: f64, dof: usize) -> ChiSquare {
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).unwrap().sf(stat) };
    ChiSquare { stat, dof, p_value }
}

/// Goodness of fit of counts against a pmf. Cells with expected count below
/// 5 are pooled, in order, into their neighbor; zero-probability cells must
/// be empty and are reported as a certain rejection otherwise.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let total: f64 = probs.iter().sum();
    if observed.iter().zip(probs).any(|(&o, &p)| p <= 0.0 && o > 0) {
        return ChiSquare { stat: f64::INFINITY, dof: 1, p_value: 0.0 };
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        o_acc += o as f64;
        e_acc += n as f64 * p / total;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        match cells.last_mut() {
            Some(c) => {
                c.0 += o_acc;
                c.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    let stat = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    finish(stat, cells.len().saturating_sub(1))
}

/// Two-sample homogeneity test on binned counts; bins empty in both samples
/// are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        let d = ka * x as f64 - kb * y as f64;
        stat += d * d / (x + y) as f64;
        cells += 1;
    }
    finish(stat, cells.saturating_sub(1))
}

/// Cut points splitting the pooled sample into bins of at least `min_count`
/// values each; bin i holds values in [cuts[i], cuts[i+1]).
pub fn pooled_bins(a: &[u64], b: &[u64], min_count: usize) -> Vec<u64> {
    let mut pooled: Vec<u64> = a.iter().chain(b).copied().collect();
    pooled.sort_unstable();
    let mut cuts = vec![0];
    let mut i = 0;
    while i < pooled.len() {
        let mut j = (i + min_count).min(pooled.len());
        // keep ties together
        while j < pooled.len() && pooled[j] == pooled[j - 1] {
            j += 1;
        }
        if pooled.len() - j < min_count {
            break;
        }
        cuts.push(pooled[j]);
        i = j;
    }
    cuts
}

pub fn histogram(xs: &[u64], cuts: &[u64]) -> Vec<u64> {
    let mut h = vec![0u64; cuts.len()];
    for &x in xs {
        let i = cuts.partition_point(|&c| c <= x) - 1;
        h[i] += 1;
    }
    h
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// P[Bin(n, p) ≥ k], summed exactly in log space.
pub fn binomial_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    let lg = |x: u64| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
    (k..=n)
        .map(|i| (lg(n) - lg(i) - lg(n - i) + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_extremes() {
        let t = chi_square_gof(&[500, 500], &[0.5, 0.5]);
        assert_eq!(t.stat, 0.0);
        assert!(t.passes(1e-3));
        assert!(!chi_square_gof(&[900, 100], &[0.5, 0.5]).passes(1e-3));
        assert!(!chi_square_gof(&[1, 99], &[0.0, 1.0]).passes(1e-3));
    }

    #[test]
    fn gof_pools_small_cells() {
        let t = chi_square_gof(&[98, 1, 1], &[0.98, 0.01, 0.01]);
        assert_eq!(t.dof, 0);
    }

    #[test]
    fn two_sample_and_bins() {
        let a: Vec<u64> = (0..1000).map(|i| i % 10).collect();
        let cuts = pooled_bins(&a, &a, 50);
        assert_eq!(cuts, (0..10).collect::<Vec<_>>());
        let h = histogram(&a, &cuts);
        assert!(chi_square_two_sample(&h, &h).passes(1e-3));
        let b: Vec<u64> = (0..1000).map(|i| (i % 10).min(4)).collect();
        assert!(!chi_square_two_sample(&h, &histogram(&b, &cuts)).passes(1e-3));
    }

    #[test]
    fn slope_and_tail() {
        let pts: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 3.0 * (i as f64).powf(0.7))).collect();
        assert!((log_log_slope(&pts) - 0.7).abs() < 1e-12);
        assert!((binomial_upper_tail(4, 0.5, 3) - 5.0 / 16.0).abs() < 1e-12);
    }
}
