//! Generalized-linear estimation machinery.

mod confidence;
mod estimator;
mod link;
mod mle;

pub use confidence::{confidence_radius, optimistic_param, ConfidenceConfig, Direction};
pub use estimator::{ArmEstimator, REFRESH_PERIOD};
pub use link::{LinkFunction, LinkKind};
pub use mle::{mle_fit, penalized_nll, MleSettings};
