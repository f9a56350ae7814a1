//! Spin-system models and their exact oracles.

mod brute;
mod hyper;
mod polymer;
mod spin;
mod two_spin;

pub use brute::{brute_force_marginal, brute_force_marginals, brute_force_partition, GibbsModel, KahanSum, MAX_STATES};
pub use hyper::HyperIs;
pub use polymer::{Polymer, PolymerModel, PolymerWeight};
pub use spin::SpinSystem;
pub use two_spin::{
    hardcore_lambda_c, influence_h, marginal_lower_bound, tree_recursion_step, two_spin_weight, uniqueness_gap,
    MarginalRatio, TwoSpinModel, TwoSpinParams, UniquenessReport,
};
