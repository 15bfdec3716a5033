//! Independent checks: lattice dynamic programming and common-random-number
//! policy comparison. Nothing here uses the extrema laws or the index
//! functions.

pub mod compare;
pub mod follower_dp;
pub mod lattice;
pub mod stopping_dp;

pub use compare::{policy_comparison, ComparisonRow, ComparisonTable};
pub use follower_dp::{dp_follower_oracle, FollowerOracle};
pub use lattice::{build_chain, Boundary, Chain, LatticeSpec};
pub use stopping_dp::{dp_stopping_oracle, StoppingOracle};
