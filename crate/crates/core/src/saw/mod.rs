//! Self-avoiding-walk trees: the incremental walk, boundary truncation, the
//! flowered tree oracle and the unbiased marginal estimator.

mod boundary;
mod estimate;
mod flower;
mod walk;

pub use boundary::{boundary, boundary_depth_bound, boundary_depth_bound_any, boundary_exponent, boundary_size_bound, BoundarySet, CompleteTree, RootedTree};
pub use estimate::{estimate_marginal_saw, SawEstimate};
pub use flower::{build_flower, FlowerOracle, TreeNode, TREE_NODE_LIMIT};
pub use walk::{saw_step, CopyVertex, Derived, SawChild, SawCursor, SawWalk};
