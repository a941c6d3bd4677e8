use rand::seq::SliceRandom;

use super::adam::{Adam, AdamSettings};
use super::mlp::{Mlp, HIDDEN_WIDTH};
use crate::environment::Outcome;
use crate::policy::{Arm, ArmContexts, DeferralPolicy, FeedbackMode, PolicyConfig, StepRecord};
use crate::rng::{self, Rng};
use crate::{Error, Result, Vector};

/// One Adam step on the mean squared error of `batch`. Returns the loss
/// before the step.
pub fn train_step(net: &mut Mlp, adam: &mut Adam, batch: &[(&Vector, f64)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Domain("training batch is empty".into()));
    }
    let (loss, grads) = net.gradients(batch)?;
    if !grads.is_finite() || !loss.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite gradient (loss {loss}, batch of {}, step {})",
            batch.len(),
            adam.steps
        )));
    }
    adam.apply(net, &grads);
    Ok(loss)
}

/// Retraining cadence: every `initial_period` rounds, switching to
/// `later_period` from round `switch_round` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainSchedule {
    pub initial_period: u64,
    pub switch_round: Option<u64>,
    pub later_period: u64,
}

impl TrainSchedule {
    pub fn every(period: u64) -> Self {
        Self {
            initial_period: period,
            switch_round: None,
            later_period: period,
        }
    }

    pub fn stepped(initial_period: u64, switch_round: u64, later_period: u64) -> Self {
        Self {
            initial_period,
            switch_round: Some(switch_round),
            later_period,
        }
    }

    /// Every 10 rounds.
    pub fn knapsack() -> Self {
        Self::every(10)
    }

    /// Every 20 rounds, then every 100 from round 4000.
    pub fn imagenet() -> Self {
        Self::stepped(20, 4000, 100)
    }

    /// Networks stay frozen.
    pub fn never() -> Self {
        Self::every(u64::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_period == 0 || self.later_period == 0 {
            return Err(Error::Config("training periods must be positive".into()));
        }
        Ok(())
    }

    pub fn period_at(&self, t: u64) -> u64 {
        match self.switch_round {
            Some(s) if t >= s => self.later_period,
            _ => self.initial_period,
        }
    }

    pub fn is_update_round(&self, t: u64) -> bool {
        t > 0 && t.is_multiple_of(self.period_at(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub schedule: TrainSchedule,
    /// Recompute every stored embedding after retraining.
    pub recompute_embeddings: bool,
    /// Append a constant 1 to embeddings so the linear head has an intercept.
    pub append_bias: bool,
    pub seed: u64,
}

impl NeuralConfig {
    pub fn new(learning_rate: f64, schedule: TrainSchedule) -> Self {
        Self {
            hidden: HIDDEN_WIDTH,
            learning_rate,
            batch_size: 500,
            schedule,
            recompute_embeddings: true,
            append_bias: true,
            seed: 0,
        }
    }

    /// Dimension of the linear system the estimators see.
    pub fn feature_dim(&self) -> usize {
        self.hidden + usize::from(self.append_bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Model = 0,
    Human = 1,
    Cost = 2,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Model, Role::Human, Role::Cost];
}

/// Raw contexts and responses observed by each estimator, in arrival order.
/// The matching embeddings live in the estimators' histories.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingBank {
    raw: [Vec<(Vector, f64)>; 3],
}

impl EmbeddingBank {
    pub fn data(&self, role: Role) -> &[(Vector, f64)] {
        &self.raw[role as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.raw.iter().all(Vec::is_empty)
    }

    fn push(&mut self, role: Role, x: &Vector, y: f64) {
        self.raw[role as usize].push((x.clone(), y));
    }
}

/// The deferral policy run on learned embeddings.
#[derive(Debug, Clone)]
pub struct NeuralLinearPolicy {
    policy: DeferralPolicy,
    cfg: NeuralConfig,
    nets: [Mlp; 3],
    adams: [Adam; 3],
    bank: EmbeddingBank,
    rng: Rng,
    retrain_events: usize,
}

impl NeuralLinearPolicy {
    /// `policy_cfg.dim` is the raw context dimension; the estimators are
    /// built over the embedding dimension instead.
    pub fn new(policy_cfg: PolicyConfig, cfg: NeuralConfig) -> Result<Self> {
        let mut init_rng = rng::from_seed(rng::derive(cfg.seed, 1));
        let input = policy_cfg.dim;
        let nets = [
            Mlp::init(input, cfg.hidden, &mut init_rng),
            Mlp::init(input, cfg.hidden, &mut init_rng),
            Mlp::init(input, cfg.hidden, &mut init_rng),
        ];
        Self::with_networks(policy_cfg, cfg, nets)
    }

    pub fn with_networks(mut policy_cfg: PolicyConfig, cfg: NeuralConfig, nets: [Mlp; 3]) -> Result<Self> {
        cfg.schedule.validate()?;
        if cfg.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        let input = policy_cfg.dim;
        if nets.iter().any(|n| n.input_dim() != input || n.hidden_dim() != cfg.hidden) {
            return Err(Error::Domain("network shapes do not match the configuration".into()));
        }
        policy_cfg.dim = cfg.feature_dim();
        policy_cfg.bounded_contexts = false;
        let settings = AdamSettings::with_learning_rate(cfg.learning_rate);
        let adams = [
            Adam::new(&nets[0], settings),
            Adam::new(&nets[1], settings),
            Adam::new(&nets[2], settings),
        ];
        Ok(Self {
            policy: DeferralPolicy::new(policy_cfg)?,
            rng: rng::from_seed(rng::derive(cfg.seed, 2)),
            cfg,
            nets,
            adams,
            bank: EmbeddingBank::default(),
            retrain_events: 0,
        })
    }

    pub fn policy(&self) -> &DeferralPolicy {
        &self.policy
    }

    pub fn networks(&self) -> &[Mlp; 3] {
        &self.nets
    }

    pub fn bank(&self) -> &EmbeddingBank {
        &self.bank
    }

    pub fn retrain_events(&self) -> usize {
        self.retrain_events
    }

    /// Embedding of `x` under the network for `role`, bias coordinate included.
    pub fn features(&self, role: Role, x: &Vector) -> Result<Vector> {
        let h = self.nets[role as usize].embed(x)?;
        Ok(if self.cfg.append_bias {
            let mut e = Vector::from_element(h.len() + 1, 1.0);
            e.rows_mut(0, h.len()).copy_from(&h);
            e
        } else {
            h
        })
    }

    /// One round: embed, decide, observe, update the price, and retrain on
    /// schedule.
    pub fn step(&mut self, x: &Vector, outcome: &Outcome) -> Result<StepRecord> {
        let e_m = self.features(Role::Model, x)?;
        let e_h = self.features(Role::Human, x)?;
        let e_c = self.features(Role::Cost, x)?;
        let ctx = ArmContexts {
            model: &e_m,
            human: &e_h,
            cost: &e_c,
        };
        let record = self.policy.step(ctx, outcome)?;

        let human = record.decision.arm == Arm::Human;
        if human || self.policy.config().feedback == FeedbackMode::FullInformation {
            self.bank.push(Role::Model, x, outcome.r_model);
        }
        if human {
            self.bank.push(Role::Human, x, outcome.r_human);
            self.bank.push(Role::Cost, x, outcome.cost);
        }
        if self.cfg.schedule.is_update_round(record.t) {
            self.retrain_and_rebuild()?;
        }
        Ok(record)
    }

    /// One shuffled epoch of mini-batch training per network, then embedding
    /// recomputation and a full estimator rebuild.
    pub fn retrain_and_rebuild(&mut self) -> Result<()> {
        if self.bank.is_empty() {
            return Ok(());
        }
        for role in Role::ALL {
            let data = &self.bank.raw[role as usize];
            if data.is_empty() {
                continue;
            }
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut self.rng);
            for chunk in order.chunks(self.cfg.batch_size) {
                let batch: Vec<(&Vector, f64)> = chunk.iter().map(|&i| (&data[i].0, data[i].1)).collect();
                train_step(&mut self.nets[role as usize], &mut self.adams[role as usize], &batch)?;
            }
        }
        self.retrain_events += 1;
        if self.cfg.recompute_embeddings {
            let mut rebuilt: Vec<Vec<(Vector, f64)>> = Vec::with_capacity(3);
            for role in Role::ALL {
                let hist = self.bank.raw[role as usize]
                    .iter()
                    .map(|(x, y)| Ok((self.features(role, x)?, *y)))
                    .collect::<Result<Vec<_>>>()?;
                rebuilt.push(hist);
            }
            let cost = rebuilt.pop().expect("three roles");
            let human = rebuilt.pop().expect("three roles");
            let model = rebuilt.pop().expect("three roles");
            self.policy.rebuild_estimators(model, human, cost)?;
        }
        Ok(())
    }
}
