use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Spin};

const WEIGHT_MIN: f64 = 1e-6;
const WEIGHT_MAX: f64 = 1e6;
const ROOT_TOL: f64 = 1e-12;
/// Gaps at or below this are treated as critical.
const GAP_EPS: f64 = 1e-9;

/// Edge weights A = [[γ, 1], [1, β]] and field λ on spin 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSpinParams {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl TwoSpinParams {
    pub fn hardcore(lambda: f64) -> Self {
        TwoSpinParams { beta: 0.0, gamma: 1.0, lambda }
    }

    pub fn ising(beta: f64, lambda: f64) -> Self {
        TwoSpinParams { beta, gamma: beta, lambda }
    }

    pub fn is_hardcore(&self) -> bool {
        self.beta == 0.0 && self.gamma == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (WEIGHT_MIN..=WEIGHT_MAX).contains(&x);
        if !(self.beta == 0.0 || in_range(self.beta)) || !in_range(self.gamma) || !in_range(self.lambda) {
            return Err(Error::InvalidParams(format!(
                "weights must lie in [{WEIGHT_MIN:e}, {WEIGHT_MAX:e}] (beta may be 0): {self:?}"
            )));
        }
        if self.beta > self.gamma {
            return Err(Error::InvalidParams(format!("need beta <= gamma, got {self:?}")));
        }
        Ok(())
    }

    pub fn edge_weight(&self, a: Spin, b: Spin) -> f64 {
        match (a, b) {
            (0, 0) => self.gamma,
            (1, 1) => self.beta,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSpinModel {
    pub graph: Graph,
    pub params: TwoSpinParams,
}

impl TwoSpinModel {
    pub fn new(graph: Graph, params: TwoSpinParams) -> Result<Self> {
        params.validate()?;
        Ok(TwoSpinModel { graph, params })
    }
}

pub fn two_spin_weight(g: &Graph, params: &TwoSpinParams, sigma: &[Spin]) -> f64 {
    let mut w = 1.0;
    for &s in sigma {
        if s == 1 {
            w *= params.lambda;
        }
    }
    for (u, v) in g.edges() {
        w *= params.edge_weight(sigma[u], sigma[v]);
        if w == 0.0 {
            return 0.0;
        }
    }
    w
}

/// Projective pair (p1, p0) standing for R = p1 / p0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalRatio {
    pub p1: f64,
    pub p0: f64,
}

impl MarginalRatio {
    pub const PINNED_ONE: MarginalRatio = MarginalRatio { p1: 1.0, p0: 0.0 };
    pub const PINNED_ZERO: MarginalRatio = MarginalRatio { p1: 0.0, p0: 1.0 };

    pub fn pinned(c: Spin) -> Self {
        if c == 1 {
            Self::PINNED_ONE
        } else {
            Self::PINNED_ZERO
        }
    }

    pub fn free_leaf(params: &TwoSpinParams) -> Self {
        MarginalRatio { p1: params.lambda, p0: 1.0 }.normalized()
    }

    pub fn normalized(self) -> Self {
        let m = self.p1.max(self.p0);
        if m > 0.0 {
            MarginalRatio { p1: self.p1 / m, p0: self.p0 / m }
        } else {
            self
        }
    }

    /// μ(1) = R / (1 + R).
    pub fn prob_one(&self) -> f64 {
        self.p1 / (self.p1 + self.p0)
    }

    pub fn ratio(&self) -> f64 {
        self.p1 / self.p0
    }

    pub fn is_valid(&self) -> bool {
        self.p1 >= 0.0 && self.p0 >= 0.0 && (self.p1 > 0.0 || self.p0 > 0.0)
    }
}

/// R = λ ∏ (β R_i + 1) / (R_i + γ), carried projectively.
pub fn tree_recursion_step(params: &TwoSpinParams, children: &[MarginalRatio]) -> Result<MarginalRatio> {
    let mut acc = MarginalRatio { p1: params.lambda, p0: 1.0 }.normalized();
    for c in children {
        if !c.is_valid() {
            return Err(Error::Infeasible);
        }
        let num = params.beta * c.p1 + c.p0;
        let den = c.p1 + params.gamma * c.p0;
        acc = MarginalRatio { p1: acc.p1 * num, p0: acc.p0 * den }.normalized();
    }
    if !acc.is_valid() {
        return Err(Error::Infeasible);
    }
    Ok(acc)
}

/// h(x) = (1 - βγ) x / ((β x + 1)(x + γ)).
pub fn influence_h(params: &TwoSpinParams, x: f64) -> f64 {
    (1.0 - params.beta * params.gamma) * x / ((params.beta * x + 1.0) * (x + params.gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub delta: Option<f64>,
    pub fixed_points: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub is_unique: bool,
}

/// Up-to-Δ uniqueness: for every 1 ≤ d < Δ, the fixed point x̂_d of
/// F_d(x) = λ((βx+1)/(x+γ))^d must have |F_d'(x̂_d)| ≤ 1 - δ.
pub fn uniqueness_gap(params: &TwoSpinParams, max_degree: usize) -> Result<UniquenessReport> {
    params.validate()?;
    if max_degree < 2 {
        return Err(Error::InvalidParams("uniqueness needs Delta >= 2".into()));
    }
    if params.beta * params.gamma >= 1.0 {
        return Err(Error::InvalidParams("uniqueness gap needs beta*gamma < 1".into()));
    }
    let TwoSpinParams { beta, gamma, lambda } = *params;
    let mut fixed_points = Vec::new();
    let mut derivatives = Vec::new();
    for d in 1..max_degree {
        let f = |x: f64| lambda * ((beta * x + 1.0) / (x + gamma)).powi(d as i32) - x;
        let (mut lo, mut hi) = (0.0, lambda.max(lambda / gamma.powi(d as i32)) + 1.0);
        let mut iters = 0;
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
            if iters > 400 {
                return Err(Error::NoConvergence { d });
            }
        }
        let x = 0.5 * (lo + hi);
        fixed_points.push(x);
        derivatives.push(d as f64 * influence_h(params, x));
    }
    let worst = derivatives.iter().cloned().fold(0.0, f64::max);
    let gap = 1.0 - worst;
    let is_unique = gap > GAP_EPS;
    Ok(UniquenessReport { delta: is_unique.then_some(gap), fixed_points, derivatives, is_unique })
}

/// λ_c(Δ) = (Δ-1)^(Δ-1) / (Δ-2)^Δ.
pub fn hardcore_lambda_c(max_degree: usize) -> f64 {
    let d = max_degree as f64;
    (d - 1.0).powf(d - 1.0) / (d - 2.0).powf(d)
}

/// Lower bound b on both marginals of a vertex whose neighbors are unpinned.
/// R with d free children lies in [λ f_lo^d, λ γ^-d], where f_lo is the
/// smallest factor (βR+1)/(R+γ) over the largest possible child ratio.
pub fn marginal_lower_bound(params: &TwoSpinParams, max_degree: usize) -> f64 {
    let TwoSpinParams { beta, gamma, lambda } = *params;
    let dm = max_degree.max(1);
    let r_max = lambda * (1.0 / gamma).max(1.0).powi(dm as i32 - 1);
    let f_lo = (beta * r_max + 1.0) / (r_max + gamma);
    let p = |r: f64| r / (1.0 + r);
    let mut b: f64 = 1.0;
    for d in 0..=dm {
        let lo = lambda * f_lo.powi(d as i32);
        let hi = lambda * gamma.powi(-(d as i32));
        b = b.min(p(lo)).min(1.0 - p(hi));
    }
    b
}
