use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::ParamRegime;
use crate::glm::{ConfidenceConfig, LinkFunction, LinkKind};
use crate::neural::{NeuralConfig, TrainSchedule};
use crate::policy::{FeedbackMode, PolicyConfig, PolicyLinks};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Regret against OPT with uniformly random parameters.
    Synthetic1,
    /// Performance across budgets in a chosen parameter regime.
    Synthetic2,
    KnapsackReplay,
    #[serde(rename = "imagenet_replay")]
    ImageNetReplay,
}

impl ExperimentKind {
    pub fn is_replay(&self) -> bool {
        matches!(self, Self::KnapsackReplay | Self::ImageNetReplay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Linear,
    NeuralLinear,
    ModelOnly,
    HumanOnly,
    ArbitraryHuman,
    BestReject,
    Opt,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Linear => "linear",
            Algorithm::NeuralLinear => "neural_linear",
            Algorithm::ModelOnly => "model_only",
            Algorithm::HumanOnly => "human_only",
            Algorithm::ArbitraryHuman => "arbitrary_human",
            Algorithm::BestReject => "best_reject",
            Algorithm::Opt => "opt",
        }
    }

    /// Learning policies whose behavior depends on the feedback mode.
    pub fn is_learner(&self) -> bool {
        matches!(self, Algorithm::Linear | Algorithm::NeuralLinear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetUnit {
    /// Budgets are fractions of the horizon.
    Fraction,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    /// Rounds per episode. Replay experiments default to the dataset length.
    pub horizon: Option<usize>,
    pub budgets: Vec<f64>,
    #[serde(default = "default_budget_unit")]
    pub budget_unit: BudgetUnit,
    pub trials: Option<usize>,
    #[serde(default = "default_feedback")]
    pub feedback: Vec<FeedbackMode>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Warm-up rounds contribute no regret when set.
    #[serde(default)]
    pub exclude_warmup: bool,
    /// Spacing of the recorded regret curve.
    #[serde(default = "default_curve_stride")]
    pub curve_stride: usize,
    /// Skip writing trace files (summary only).
    #[serde(default)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    pub dim: usize,
    pub max_ones: usize,
    pub lambda: f64,
    pub noise_sigma: f64,
    /// Defaults to `uniform_random` for synthetic1 and `complementary` otherwise.
    pub regime: Option<ParamRegime>,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            dim: 20,
            max_ones: 8,
            lambda: 0.3,
            noise_sigma: 0.1,
            regime: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaySection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub ridge: f64,
    pub sigma: f64,
    pub delta: f64,
    pub logistic_kappa: f64,
    pub reward_link: Option<LinkKind>,
    pub cost_link: Option<LinkKind>,
    /// Defaults to 4·d.
    pub init_rounds_cap: Option<usize>,
    /// Defaults to max(1, largest cost in the data).
    pub guard_threshold: Option<f64>,
    pub per_arm_radius: bool,
    pub logistic_refit_period: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            ridge: 1.0,
            sigma: 0.1,
            delta: 0.1,
            logistic_kappa: LinkFunction::DEFAULT_LOGISTIC_KAPPA,
            reward_link: None,
            cost_link: None,
            init_rounds_cap: None,
            guard_threshold: None,
            per_arm_radius: false,
            logistic_refit_period: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuralSection {
    pub hidden: usize,
    /// Defaults to 0.0005 (knapsack) or 0.0001 (imagenet); 0.001 otherwise.
    pub learning_rate: Option<f64>,
    pub batch_size: usize,
    pub update_every: Option<u64>,
    pub switch_round: Option<u64>,
    pub later_period: Option<u64>,
    pub recompute_embeddings: bool,
    pub append_bias: bool,
}

impl Default for NeuralSection {
    fn default() -> Self {
        Self {
            hidden: crate::neural::HIDDEN_WIDTH,
            learning_rate: None,
            batch_size: 500,
            update_every: None,
            switch_round: None,
            later_period: None,
            recompute_embeddings: true,
            append_bias: true,
        }
    }
}

/// A complete experiment description, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
    pub replay: Option<ReplaySection>,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub neural: NeuralSection,
}

fn default_budget_unit() -> BudgetUnit {
    BudgetUnit::Fraction
}

fn default_feedback() -> Vec<FeedbackMode> {
    vec![FeedbackMode::FullInformation]
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![
        Algorithm::Linear,
        Algorithm::ModelOnly,
        Algorithm::ArbitraryHuman,
        Algorithm::BestReject,
        Algorithm::Opt,
    ]
}

fn default_curve_stride() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| format!("line {}: ", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_default();
            Error::Config(format!("{at}{}", e.message().trim()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Replay paths are relative to the config file.
        if let (Some(replay), Some(dir)) = (cfg.replay.as_mut(), path.parent()) {
            if replay.path.is_relative() {
                replay.path = dir.join(&replay.path);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// 100 trials for the regret experiment, 20 elsewhere.
    pub fn trials(&self) -> usize {
        self.experiment.trials.unwrap_or(match self.experiment.kind {
            ExperimentKind::Synthetic1 => 100,
            _ => 20,
        })
    }

    pub fn regime(&self) -> ParamRegime {
        self.synthetic.regime.unwrap_or(match self.experiment.kind {
            ExperimentKind::Synthetic1 => ParamRegime::UniformRandom,
            _ => ParamRegime::Complementary,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.trials == Some(0) {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if e.budgets.is_empty() || e.budgets.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(Error::Config("budgets must be a non-empty list of positive numbers".into()));
        }
        if e.budget_unit == BudgetUnit::Fraction && e.budgets.iter().any(|b| *b > 1.0) {
            return Err(Error::Config("fractional budgets must not exceed 1".into()));
        }
        if e.feedback.is_empty() || e.algorithms.is_empty() {
            return Err(Error::Config("feedback and algorithms must be non-empty".into()));
        }
        if e.curve_stride == 0 {
            return Err(Error::Config("curve_stride must be positive".into()));
        }
        if e.kind.is_replay() {
            if self.replay.is_none() {
                return Err(Error::Config("replay experiments need a [replay] path".into()));
            }
        } else {
            if e.horizon.unwrap_or(0) == 0 {
                return Err(Error::Config("synthetic experiments need horizon >= 1".into()));
            }
            let s = &self.synthetic;
            crate::environment::SyntheticContextDist::new(s.dim, s.max_ones, s.lambda)?;
            if !(s.noise_sigma >= 0.0) {
                return Err(Error::Config("noise_sigma must be >= 0".into()));
            }
        }
        let p = &self.policy;
        ConfidenceConfig::new(p.sigma, 1.0, p.delta)?;
        if !(p.ridge > 0.0) {
            return Err(Error::Config("ridge must be > 0".into()));
        }
        LinkFunction::logistic_with_kappa(p.logistic_kappa)?;
        if p.logistic_refit_period == 0 || self.neural.batch_size == 0 || self.neural.hidden == 0 {
            return Err(Error::Config("periods, batch size and hidden width must be positive".into()));
        }
        self.schedule().validate()
    }

    pub fn absolute_budgets(&self, horizon: usize) -> Vec<f64> {
        self.experiment
            .budgets
            .iter()
            .map(|b| match self.experiment.budget_unit {
                BudgetUnit::Fraction => b * horizon as f64,
                BudgetUnit::Absolute => *b,
            })
            .collect()
    }

    fn link(&self, kind: LinkKind) -> LinkFunction {
        match kind {
            LinkKind::Identity => LinkFunction::identity(),
            LinkKind::Logistic => LinkFunction::logistic_with_kappa(self.policy.logistic_kappa).expect("validated"),
        }
    }

    /// Identity links everywhere except logistic rewards on ImageNet16H.
    pub fn links(&self) -> PolicyLinks {
        let reward_default = match self.experiment.kind {
            ExperimentKind::ImageNetReplay => LinkKind::Logistic,
            _ => LinkKind::Identity,
        };
        let reward = self.link(self.policy.reward_link.unwrap_or(reward_default));
        PolicyLinks {
            reward_model: reward,
            reward_human: reward,
            cost: self.link(self.policy.cost_link.unwrap_or(LinkKind::Identity)),
        }
    }

    pub fn policy_config(&self, horizon: usize, budget: f64, dim: usize, feedback: FeedbackMode, seed: u64, max_cost: f64) -> PolicyConfig {
        let p = &self.policy;
        let mut cfg = PolicyConfig::new(horizon, budget, dim);
        cfg.feedback = feedback;
        cfg.links = self.links();
        cfg.confidence = ConfidenceConfig {
            sigma: p.sigma,
            kappa: 1.0,
            delta: p.delta,
        };
        cfg.ridge = p.ridge;
        if let Some(cap) = p.init_rounds_cap {
            cfg.init_rounds_cap = cap;
        }
        cfg.seed = seed;
        cfg.guard_threshold = p.guard_threshold.unwrap_or(max_cost.max(1.0));
        cfg.per_arm_radius = p.per_arm_radius;
        cfg.logistic_refit_period = p.logistic_refit_period;
        cfg
    }

    pub fn schedule(&self) -> TrainSchedule {
        let n = &self.neural;
        let default = match self.experiment.kind {
            ExperimentKind::ImageNetReplay => TrainSchedule::imagenet(),
            _ => TrainSchedule::knapsack(),
        };
        let initial = n.update_every.unwrap_or(default.initial_period);
        match (n.switch_round.or(default.switch_round), n.later_period) {
            (Some(s), later) => TrainSchedule::stepped(initial, s, later.unwrap_or(default.later_period)),
            (None, _) => TrainSchedule::every(initial),
        }
    }

    pub fn neural_config(&self, seed: u64) -> NeuralConfig {
        let n = &self.neural;
        let lr = n.learning_rate.unwrap_or(match self.experiment.kind {
            ExperimentKind::KnapsackReplay => 0.0005,
            ExperimentKind::ImageNetReplay => 0.0001,
            _ => 0.001,
        });
        let mut cfg = NeuralConfig::new(lr, self.schedule());
        cfg.hidden = n.hidden;
        cfg.batch_size = n.batch_size;
        cfg.recompute_embeddings = n.recompute_embeddings;
        cfg.append_bias = n.append_bias;
        cfg.seed = seed;
        cfg
    }

    /// Stable 64-bit fingerprint of the configuration, stamped on traces.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_toml().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
