//! Budgeted online deferral between a model and a human expert.
//!
//! The decision of whether to take the model's answer (free) or defer to a
//! human (costly) is cast as a two-armed contextual bandit with a knapsack
//! constraint. Rewards and costs follow generalized linear models, estimated
//! online with optimistic confidence ellipsoids, and the budget is priced by
//! a dual variable updated with multiplicative weights.
//!
//! Module map:
//! - [`glm`]: link functions, maximum likelihood fitting, design matrices and
//!   optimistic parameter perturbation.
//! - [`policy`]: the deferral policy state machine.
//! - [`environment`]: synthetic context/outcome generators and replay loaders.
//! - [`oracles`]: empirical OPT, baselines and knapsack helpers.
//! - [`neural`]: the neural-embedding variant of the policy.
//! - [`experiment`]: configuration, multi-trial runner, traces and summaries.

// `!(x >= 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod environment;
pub mod error;
pub mod experiment;
pub mod glm;
pub mod neural;
pub mod oracles;
pub mod policy;
pub mod rng;

pub use error::{Error, Result};

/// Dense real vector used for contexts, embeddings and parameters.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
