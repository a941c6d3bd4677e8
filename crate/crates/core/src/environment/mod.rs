//! Context and outcome generation: the sparse-binary synthetic distribution,
//! GLM reward/cost environments and replay of logged decision rows.

mod knapsack;
mod replay;
mod synthetic;

pub use knapsack::{gen_knapsack_instance, knapsack_features, read_instances, write_instances, KnapsackInstance};
pub use replay::{load_replay, write_replay, ReplayRow, ReplaySchema};
pub use synthetic::{clipped_normal_mean, gen_params, LinearEnvironment, ParamRegime, SyntheticContextDist};

use crate::Vector;

/// Everything that happens in one round, whether or not the learner sees it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Outcome {
    pub r_model: f64,
    pub r_human: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub context: Vector,
    pub outcome: Outcome,
}

/// A stream of rounds consumed by an episode.
pub trait RoundSource {
    fn next_round(&mut self) -> Option<Round>;
}

/// Replays a pre-generated sequence of rounds.
#[derive(Debug, Clone)]
pub struct VecSource {
    rounds: std::vec::IntoIter<Round>,
}

impl VecSource {
    pub fn new(rounds: Vec<Round>) -> Self {
        Self {
            rounds: rounds.into_iter(),
        }
    }
}

impl RoundSource for VecSource {
    fn next_round(&mut self) -> Option<Round> {
        self.rounds.next()
    }
}

impl<'a> RoundSource for std::slice::Iter<'a, Round> {
    fn next_round(&mut self) -> Option<Round> {
        self.next().cloned()
    }
}
