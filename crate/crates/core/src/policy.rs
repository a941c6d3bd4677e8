//! Budgeted two-armed GLM deferral policy.
//!
//! Each round the policy either takes the model's answer (free) or defers to
//! the human (costly). After a short random warm-up it plays
//! `argmax_a μ(xᵀθ̃_a) − (T/B)·γ·cost_a` with optimistic reward estimates θ̃
//! and pessimistic-for-cost estimates w̃, and prices the budget through a
//! dual variable γ = α/(1+α) updated by multiplicative weights.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::environment::{Outcome, RoundSource};
use crate::glm::{confidence_radius, optimistic_param, ArmEstimator, ConfidenceConfig, Direction, LinkFunction};
use crate::rng::{self, Rng};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Model,
    Human,
}

impl Arm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arm::Model => "model",
            Arm::Human => "human",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// The model's reward is observed every round.
    #[serde(alias = "full")]
    FullInformation,
    /// Only the chosen arm is observed.
    #[serde(alias = "bandit")]
    PureBandit,
}

impl FeedbackMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeedbackMode::FullInformation => "full",
            FeedbackMode::PureBandit => "bandit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initializing,
    Main,
}

/// Link functions of the three estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyLinks {
    pub reward_model: LinkFunction,
    pub reward_human: LinkFunction,
    pub cost: LinkFunction,
}

impl PolicyLinks {
    pub fn uniform(link: LinkFunction) -> Self {
        Self {
            reward_model: link,
            reward_human: link,
            cost: link,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub horizon: usize,
    pub budget: f64,
    /// Dimension of every estimator's context.
    pub dim: usize,
    pub feedback: FeedbackMode,
    pub links: PolicyLinks,
    /// σ and δ of the confidence radius. κ is taken per estimator from its link.
    pub confidence: ConfidenceConfig,
    pub ridge: f64,
    pub init_rounds_cap: usize,
    pub seed: u64,
    /// Force the model once the remaining budget drops below this value.
    pub guard_threshold: f64,
    /// Use each estimator's observation count instead of the global round
    /// index in the confidence radius.
    pub per_arm_radius: bool,
    /// Enforce `‖x‖₂ ≤ 1` on contexts.
    pub bounded_contexts: bool,
    /// Refit period for logistic estimators.
    pub logistic_refit_period: usize,
}

impl PolicyConfig {
    pub fn new(horizon: usize, budget: f64, dim: usize) -> Self {
        Self {
            horizon,
            budget,
            dim,
            feedback: FeedbackMode::FullInformation,
            links: PolicyLinks::uniform(LinkFunction::identity()),
            confidence: ConfidenceConfig {
                sigma: 0.1,
                kappa: 1.0,
                delta: 0.1,
            },
            ridge: 1.0,
            init_rounds_cap: 4 * dim,
            seed: 0,
            guard_threshold: 1.0,
            per_arm_radius: false,
            bounded_contexts: true,
            logistic_refit_period: 1,
        }
    }

    /// ε = sqrt(2/T).
    pub fn epsilon(&self) -> f64 {
        (2.0 / self.horizon as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(self.budget >= 0.0 && self.budget <= self.horizon as f64) {
            return Err(Error::Config(format!(
                "budget must lie in [0, T = {}], got {}",
                self.horizon, self.budget
            )));
        }
        if self.init_rounds_cap == 0 {
            return Err(Error::Config("init_rounds_cap must be positive".into()));
        }
        if !(self.guard_threshold >= 0.0) {
            return Err(Error::Config("guard_threshold must be >= 0".into()));
        }
        self.confidence.validate()
    }
}

/// The three per-estimator views of one round's context. The linear policy
/// shares one vector; the neural variant supplies three embeddings.
#[derive(Debug, Clone, Copy)]
pub struct ArmContexts<'a> {
    pub model: &'a Vector,
    pub human: &'a Vector,
    pub cost: &'a Vector,
}

impl<'a> ArmContexts<'a> {
    pub fn shared(x: &'a Vector) -> Self {
        Self {
            model: x,
            human: x,
            cost: x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub arm: Arm,
    /// Priced objective of each arm; NaN during random initialization plays.
    pub score_model: f64,
    pub score_human: f64,
    /// The budget guard forced the model.
    pub forced: bool,
}

/// What the learner gets to see after playing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Feedback {
    pub r_model: Option<f64>,
    pub r_human: Option<f64>,
    pub cost: Option<f64>,
}

impl Feedback {
    /// Filter a fully realized outcome down to what `mode` reveals after `arm`.
    pub fn reveal(outcome: &Outcome, mode: FeedbackMode, arm: Arm) -> Self {
        match (mode, arm) {
            (_, Arm::Model) => Self {
                r_model: Some(outcome.r_model),
                ..Self::default()
            },
            (FeedbackMode::FullInformation, Arm::Human) => Self {
                r_model: Some(outcome.r_model),
                r_human: Some(outcome.r_human),
                cost: Some(outcome.cost),
            },
            (FeedbackMode::PureBandit, Arm::Human) => Self {
                r_model: None,
                r_human: Some(outcome.r_human),
                cost: Some(outcome.cost),
            },
        }
    }
}

/// Full mutable state of one episode.
#[derive(Debug, Clone)]
pub struct PolicyState {
    pub est_model: ArmEstimator,
    pub est_human: ArmEstimator,
    pub est_cost: ArmEstimator,
    pub gamma: f64,
    pub alpha: f64,
    pub spent: f64,
    /// Rounds completed so far.
    pub t: u64,
    pub phase: Phase,
}

/// One round of a policy episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub phase: Phase,
    pub decision: Decision,
    pub reward: f64,
    pub cost: f64,
    pub spent: f64,
    pub remaining: f64,
    /// γ after this round's dual update.
    pub gamma: f64,
}

/// Human only when it strictly beats the model and the budget allows it.
pub fn arm_rule(score_model: f64, score_human: f64, forced: bool) -> Arm {
    if !forced && score_human > score_model {
        Arm::Human
    } else {
        Arm::Model
    }
}

/// One multiplicative-weights step on the budget price.
///
/// Returns the new `(alpha, gamma)` for `g = γ·(cost − rate)`.
pub fn dual_step(gamma: f64, alpha: f64, epsilon: f64, cost: f64, rate: f64) -> (f64, f64) {
    let g = gamma * (cost - rate);
    let alpha = if g >= 0.0 {
        alpha * (1.0 + epsilon).powf(g)
    } else {
        alpha * (1.0 - epsilon).powf(-g)
    };
    (alpha, alpha / (1.0 + alpha))
}

#[derive(Debug, Clone)]
pub struct DeferralPolicy {
    cfg: PolicyConfig,
    state: PolicyState,
    rng: Rng,
    init_rounds: usize,
}

impl DeferralPolicy {
    pub fn new(cfg: PolicyConfig) -> Result<Self> {
        cfg.validate()?;
        let make = |link: LinkFunction| -> Result<ArmEstimator> {
            let est = ArmEstimator::new(link, cfg.dim, cfg.ridge)?
                .with_refit_period(cfg.logistic_refit_period);
            Ok(if cfg.bounded_contexts { est } else { est.without_norm_bound() })
        };
        let state = PolicyState {
            est_model: make(cfg.links.reward_model)?,
            est_human: make(cfg.links.reward_human)?,
            est_cost: make(cfg.links.cost)?,
            gamma: 0.5,
            alpha: 0.5,
            spent: 0.0,
            t: 0,
            phase: Phase::Initializing,
        };
        let rng = rng::from_seed(cfg.seed);
        Ok(Self {
            cfg,
            state,
            rng,
            init_rounds: 0,
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.cfg
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon()
    }

    pub fn remaining(&self) -> f64 {
        self.cfg.budget - self.state.spent
    }

    fn budget_exhausted(&self) -> bool {
        self.remaining() < self.cfg.guard_threshold || self.cfg.budget <= 0.0
    }

    /// Confidence radius for `est` at the upcoming round.
    pub fn radius_for(&self, est: &ArmEstimator) -> f64 {
        let t = if self.cfg.per_arm_radius {
            est.n_obs() as u64
        } else {
            self.state.t + 1
        };
        let cfg = self.cfg.confidence.with_kappa(est.link().kappa_floor());
        confidence_radius(&cfg, t, est.dim())
    }

    /// Choose an arm for this round, whatever the phase.
    pub fn decide(&mut self, ctx: ArmContexts<'_>) -> Result<Decision> {
        match self.state.phase {
            Phase::Main => self.select_arm(ctx),
            Phase::Initializing => {
                let forced = self.budget_exhausted();
                let arm = if !forced && self.rng.random::<bool>() {
                    Arm::Human
                } else {
                    Arm::Model
                };
                Ok(Decision {
                    arm,
                    score_model: f64::NAN,
                    score_human: f64::NAN,
                    forced,
                })
            }
        }
    }

    /// Optimistic priced arm choice. Only valid in the main phase.
    pub fn select_arm(&mut self, ctx: ArmContexts<'_>) -> Result<Decision> {
        if self.state.phase != Phase::Main {
            return Err(Error::State("select_arm called during initialization".into()));
        }
        self.state.est_model.refresh()?;
        self.state.est_human.refresh()?;
        self.state.est_cost.refresh()?;

        let st = &self.state;
        let theta_m = optimistic_param(&st.est_model, ctx.model, self.radius_for(&st.est_model), Direction::RewardUp)?;
        let theta_h = optimistic_param(&st.est_human, ctx.human, self.radius_for(&st.est_human), Direction::RewardUp)?;
        let w = optimistic_param(&st.est_cost, ctx.cost, self.radius_for(&st.est_cost), Direction::CostDown)?;

        let score_model = self.cfg.links.reward_model.mean(ctx.model.dot(&theta_m));
        let price = if self.cfg.budget > 0.0 {
            self.cfg.horizon as f64 / self.cfg.budget * st.gamma
        } else {
            f64::INFINITY
        };
        let expected_cost = self.cfg.links.cost.mean(ctx.cost.dot(&w));
        let score_human = self.cfg.links.reward_human.mean(ctx.human.dot(&theta_h)) - price * expected_cost;

        let forced = self.budget_exhausted();
        Ok(Decision {
            arm: arm_rule(score_model, score_human, forced),
            score_model,
            score_human,
            forced,
        })
    }

    fn check_feedback(&self, decision: &Decision, fb: &Feedback) -> Result<()> {
        let human = decision.arm == Arm::Human;
        let expect_model = match self.cfg.feedback {
            FeedbackMode::FullInformation => true,
            FeedbackMode::PureBandit => !human,
        };
        let shape_ok = fb.r_model.is_some() == expect_model && fb.r_human.is_some() == human && fb.cost.is_some() == human;
        if !shape_ok {
            return Err(Error::Protocol(format!(
                "feedback {fb:?} does not match arm {:?} under {:?}",
                decision.arm, self.cfg.feedback
            )));
        }
        if let Some(c) = fb.cost {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Protocol(format!("cost must be finite and >= 0, got {c}")));
            }
        }
        Ok(())
    }

    /// Fold the revealed feedback into the estimators and the budget ledger.
    pub fn observe(&mut self, ctx: ArmContexts<'_>, decision: &Decision, fb: &Feedback) -> Result<()> {
        self.check_feedback(decision, fb)?;
        let cost = fb.cost.unwrap_or(0.0);
        let remaining = self.remaining();
        if cost > remaining + 1e-9 {
            return Err(Error::BudgetOverrun { cost, remaining });
        }
        if let Some(r) = fb.r_model {
            self.state.est_model.update(ctx.model, r)?;
        }
        if let Some(r) = fb.r_human {
            self.state.est_human.update(ctx.human, r)?;
        }
        if let Some(c) = fb.cost {
            self.state.est_cost.update(ctx.cost, c)?;
        }
        self.state.spent += cost;
        self.state.t += 1;
        if self.state.phase == Phase::Initializing {
            self.init_rounds += 1;
            if self.init_rounds >= self.cfg.init_rounds_cap || self.warmed_up() {
                self.state.phase = Phase::Main;
            }
        }
        Ok(())
    }

    fn warmed_up(&self) -> bool {
        [&self.state.est_model, &self.state.est_human, &self.state.est_cost]
            .iter()
            .all(|e| e.n_obs() >= e.dim() && e.min_eigen_unridged() >= 1.0)
    }

    /// Multiplicative-weights update of the budget price.
    pub fn update_dual(&mut self, incurred_cost: f64) {
        let rate = self.cfg.budget / self.cfg.horizon as f64;
        let (alpha, gamma) = dual_step(self.state.gamma, self.state.alpha, self.epsilon(), incurred_cost, rate);
        self.state.alpha = alpha;
        self.state.gamma = gamma;
    }

    /// Play one round against a realized outcome.
    pub fn step(&mut self, ctx: ArmContexts<'_>, outcome: &Outcome) -> Result<StepRecord> {
        let phase = self.state.phase;
        let decision = self.decide(ctx)?;
        let fb = Feedback::reveal(outcome, self.cfg.feedback, decision.arm);
        self.observe(ctx, &decision, &fb)?;
        let (reward, cost) = match decision.arm {
            Arm::Model => (outcome.r_model, 0.0),
            Arm::Human => (outcome.r_human, outcome.cost),
        };
        if phase == Phase::Main {
            self.update_dual(cost);
        }
        Ok(StepRecord {
            t: self.state.t,
            phase,
            decision,
            reward,
            cost,
            spent: self.state.spent,
            remaining: self.remaining(),
            gamma: self.state.gamma,
        })
    }

    /// Replace every estimator's history and rebuild it from scratch.
    pub fn rebuild_estimators(
        &mut self,
        model: Vec<(Vector, f64)>,
        human: Vec<(Vector, f64)>,
        cost: Vec<(Vector, f64)>,
    ) -> Result<()> {
        self.state.est_model.rebuild(model)?;
        self.state.est_human.rebuild(human)?;
        self.state.est_cost.rebuild(cost)
    }
}

/// Run a full episode of `cfg.horizon` rounds with shared contexts.
pub fn run_episode(cfg: PolicyConfig, env: &mut dyn RoundSource) -> Result<Vec<StepRecord>> {
    let horizon = cfg.horizon;
    let mut policy = DeferralPolicy::new(cfg)?;
    let mut trace = Vec::with_capacity(horizon);
    for completed in 0..horizon {
        let round = env.next_round().ok_or(Error::Truncated { completed, horizon })?;
        trace.push(policy.step(ArmContexts::shared(&round.context), &round.outcome)?);
    }
    Ok(trace)
}
