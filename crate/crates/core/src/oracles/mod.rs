//! Offline comparators: empirical OPT, rejection-threshold and simple
//! deferral baselines, and the knapsack helpers used by the knapsack replay.

mod baselines;
mod knapsack;
mod opt;

pub use baselines::{baseline, best_reject, BaselineKind, BaselineResult, BestReject, RewardRow};
pub use knapsack::{knapsack_exact, knapsack_reward, ratiomax4, EXHAUSTIVE_MAX_ITEMS, DP_MAX_CAPACITY};
pub use opt::{opt_static_empirical, OptRow, OptSolution};
