use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::{Algorithm, ExperimentConfig, ExperimentKind};
use super::summary::{summarize_finals, summary_csv, EpisodeFinal, SummaryRow};
use super::trace::{trace_file_name, write_trace, TraceMeta, TraceRow};
use crate::environment::{gen_params, load_replay, LinearEnvironment, Outcome, ReplayRow, ReplaySchema, Round, SyntheticContextDist};
use crate::neural::NeuralLinearPolicy;
use crate::oracles::{baseline, best_reject, opt_static_empirical, BaselineKind, OptRow, RewardRow};
use crate::policy::{Arm, ArmContexts, DeferralPolicy, FeedbackMode, Phase, StepRecord};
use crate::{rng, Error, Result};

/// The realized rounds of one trial, shared by every algorithm and budget.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub trial: usize,
    pub seed: u64,
    pub rounds: Vec<Round>,
    /// Per-round values the comparators are scored on: expected outcomes for
    /// synthetic environments, realized ones for replay data.
    pub oracle: Vec<Outcome>,
    pub dim: usize,
    /// Largest single deferral cost in the data source.
    pub max_cost: f64,
}

impl TrialData {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    fn opt_rows(&self) -> Vec<OptRow> {
        self.oracle.iter().map(|o| OptRow::from_rewards(o.r_model, o.r_human, o.cost)).collect()
    }

    fn reward_rows(&self) -> Vec<RewardRow> {
        self.oracle
            .iter()
            .map(|o| RewardRow {
                r_model: o.r_model,
                r_human: o.r_human,
                cost: o.cost,
            })
            .collect()
    }
}

/// One finished (algorithm, budget, trial) episode.
#[derive(Debug, Clone)]
pub struct Episode {
    pub algorithm: Algorithm,
    pub feedback: FeedbackMode,
    /// File and summary label, e.g. `linear` or `linear_bandit`.
    pub label: String,
    pub budget: f64,
    pub trial: usize,
    pub opt: f64,
    pub rows: Vec<TraceRow>,
}

impl Episode {
    pub fn final_reward(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_reward)
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_regret)
    }

    pub fn min_remaining(&self) -> f64 {
        self.rows.iter().map(|r| r.remaining).fold(f64::INFINITY, f64::min)
    }

    /// Cumulative regret after `t` rounds.
    pub fn regret_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.rows[t - 1].cumulative_regret
        }
    }

    pub fn to_final(&self) -> EpisodeFinal {
        EpisodeFinal {
            algorithm: self.label.clone(),
            budget: self.budget,
            trial: self.trial,
            reward: self.final_reward(),
            regret: self.final_regret(),
            opt: self.opt,
        }
    }
}

pub fn episode_label(algorithm: Algorithm, feedback: FeedbackMode) -> String {
    match (algorithm.is_learner(), feedback) {
        (true, FeedbackMode::PureBandit) => format!("{}_bandit", algorithm.as_str()),
        _ => algorithm.as_str().to_string(),
    }
}

/// The data source behind an experiment, loaded once before any trial runs.
#[derive(Debug, Clone)]
pub enum Source {
    Synthetic,
    Replay(Vec<ReplayRow>),
}

impl Source {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let schema = match cfg.experiment.kind {
            ExperimentKind::KnapsackReplay => ReplaySchema::KnapsackHuman,
            ExperimentKind::ImageNetReplay => ReplaySchema::ImageNet16H,
            _ => return Ok(Source::Synthetic),
        };
        let path = &cfg.replay.as_ref().expect("validated").path;
        let rows = load_replay(path, schema)?;
        if let Some(h) = cfg.experiment.horizon {
            if h > rows.len() {
                return Err(Error::Config(format!("horizon {h} exceeds the {} rows in {}", rows.len(), path.display())));
            }
        }
        Ok(Source::Replay(rows))
    }

    pub fn horizon(&self, cfg: &ExperimentConfig) -> usize {
        match self {
            Source::Synthetic => cfg.experiment.horizon.expect("validated"),
            Source::Replay(rows) => cfg.experiment.horizon.unwrap_or(rows.len()),
        }
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    rng::derive(master, trial as u64)
}

/// Draw (synthetic) or reorder (replay) the rounds of one trial.
pub fn trial_data(cfg: &ExperimentConfig, source: &Source, trial: usize) -> Result<TrialData> {
    let seed = trial_seed(cfg.experiment.seed, trial);
    let horizon = source.horizon(cfg);
    match source {
        Source::Synthetic => {
            let s = &cfg.synthetic;
            let dist = SyntheticContextDist::new(s.dim, s.max_ones, s.lambda)?;
            let (theta_h, theta_m, w) = gen_params(cfg.regime(), s.dim, &mut rng::from_seed(rng::derive(seed, 0)));
            let env = LinearEnvironment::new(theta_m, theta_h, w, s.noise_sigma, cfg.links().reward_model)?;
            let (rounds, oracle) = env.generate(&dist, horizon, &mut rng::from_seed(rng::derive(seed, 1)));
            Ok(TrialData {
                trial,
                seed,
                rounds,
                oracle,
                dim: s.dim,
                max_cost: 1.0,
            })
        }
        Source::Replay(rows) => {
            let order = shuffled_participant_order(rows, seed);
            let scale = rows.iter().map(|r| r.features.norm()).fold(0.0, f64::max).max(1.0);
            let mut rounds = Vec::with_capacity(horizon);
            let mut oracle = Vec::with_capacity(horizon);
            for &i in order.iter().take(horizon) {
                let r = &rows[i];
                let outcome = Outcome {
                    r_model: r.r_model,
                    r_human: r.r_human,
                    cost: r.cost,
                };
                rounds.push(Round {
                    context: &r.features / scale,
                    outcome,
                });
                oracle.push(outcome);
            }
            Ok(TrialData {
                trial,
                seed,
                rounds,
                oracle,
                dim: rows[0].features.len(),
                max_cost: rows.iter().map(|r| r.cost).fold(0.0, f64::max),
            })
        }
    }
}

/// Row indices with participant blocks shuffled and within-block order kept.
/// Blocks are the participant's rows in file order.
pub fn shuffled_participant_order(rows: &[ReplayRow], seed: u64) -> Vec<usize> {
    let mut ids: Vec<&str> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        match ids.iter().position(|id| *id == r.participant_id) {
            Some(b) => blocks[b].push(i),
            None => {
                ids.push(&r.participant_id);
                blocks.push(vec![i]);
            }
        }
    }
    blocks.shuffle(&mut rng::from_seed(rng::derive(seed, 3)));
    blocks.concat()
}

fn algorithm_stream(algorithm: Algorithm, feedback: FeedbackMode) -> u64 {
    let a = algorithm as u64;
    let f = match feedback {
        FeedbackMode::FullInformation => 0,
        FeedbackMode::PureBandit => 1,
    };
    16 + 2 * a + f
}

struct RowBuilder<'a> {
    trial: usize,
    budget: f64,
    opt_per_round: &'a [f64],
    exclude_warmup: bool,
    spent: f64,
    cum_reward: f64,
    cum_regret: f64,
    rows: Vec<TraceRow>,
}

impl<'a> RowBuilder<'a> {
    fn new(trial: usize, budget: f64, opt_per_round: &'a [f64], exclude_warmup: bool) -> Self {
        Self {
            trial,
            budget,
            opt_per_round,
            exclude_warmup,
            spent: 0.0,
            cum_reward: 0.0,
            cum_regret: 0.0,
            rows: Vec::with_capacity(opt_per_round.len()),
        }
    }

    fn push(&mut self, arm: Arm, forced: bool, reward: f64, cost: f64, gamma: f64, warmup: bool) {
        let i = self.rows.len();
        self.spent += cost;
        self.cum_reward += reward;
        if !(warmup && self.exclude_warmup) {
            self.cum_regret += self.opt_per_round[i] - reward;
        }
        self.rows.push(TraceRow {
            trial: self.trial,
            t: i as u64 + 1,
            arm,
            forced,
            reward,
            cost,
            remaining: self.budget - self.spent,
            gamma,
            cumulative_reward: self.cum_reward,
            cumulative_regret: self.cum_regret,
        });
    }

    fn push_record(&mut self, rec: &StepRecord) {
        let i = self.rows.len();
        self.spent = rec.spent;
        self.cum_reward += rec.reward;
        if !(rec.phase == Phase::Initializing && self.exclude_warmup) {
            self.cum_regret += self.opt_per_round[i] - rec.reward;
        }
        self.rows.push(TraceRow {
            trial: self.trial,
            t: rec.t,
            arm: rec.decision.arm,
            forced: rec.decision.forced,
            reward: rec.reward,
            cost: rec.cost,
            remaining: rec.remaining,
            gamma: rec.gamma,
            cumulative_reward: self.cum_reward,
            cumulative_regret: self.cum_regret,
        });
    }
}

/// Run one algorithm at one budget on a trial's rounds.
pub fn run_episode_on(cfg: &ExperimentConfig, algorithm: Algorithm, feedback: FeedbackMode, budget: f64, data: &TrialData) -> Result<Episode> {
    let horizon = data.horizon();
    let opt_rows = data.opt_rows();
    let opt = opt_static_empirical(&opt_rows, budget)?;
    let opt_per_round = opt.per_round(&opt_rows);
    let mut b = RowBuilder::new(data.trial, budget, &opt_per_round, cfg.experiment.exclude_warmup);
    let seed = rng::derive(data.seed, algorithm_stream(algorithm, feedback));

    match algorithm {
        Algorithm::Linear => {
            let pcfg = cfg.policy_config(horizon, budget, data.dim, feedback, seed, data.max_cost);
            let mut policy = DeferralPolicy::new(pcfg)?;
            for round in &data.rounds {
                let rec = policy.step(ArmContexts::shared(&round.context), &round.outcome)?;
                b.push_record(&rec);
            }
        }
        Algorithm::NeuralLinear => {
            let ncfg = cfg.neural_config(rng::derive(seed, 1));
            let mut pcfg = cfg.policy_config(horizon, budget, data.dim, feedback, seed, data.max_cost);
            if cfg.policy.init_rounds_cap.is_none() {
                pcfg.init_rounds_cap = 4 * ncfg.feature_dim();
            }
            let mut policy = NeuralLinearPolicy::new(pcfg, ncfg)?;
            for round in &data.rounds {
                let rec = policy.step(&round.context, &round.outcome)?;
                b.push_record(&rec);
            }
        }
        Algorithm::ModelOnly | Algorithm::HumanOnly | Algorithm::ArbitraryHuman | Algorithm::BestReject => {
            let rows = data.reward_rows();
            let mask = match algorithm {
                Algorithm::ModelOnly => baseline(BaselineKind::ModelOnly, &rows, budget, seed).deferred,
                Algorithm::HumanOnly => baseline(BaselineKind::HumanOnly, &rows, budget, seed).deferred,
                Algorithm::ArbitraryHuman => baseline(BaselineKind::ArbitraryHuman, &rows, budget, seed).deferred,
                _ => {
                    let expected_model: Vec<f64> = rows.iter().map(|r| r.r_model).collect();
                    best_reject(&expected_model, &rows, budget).deferred
                }
            };
            for (r, d) in rows.iter().zip(mask) {
                if d {
                    b.push(Arm::Human, false, r.r_human, r.cost, f64::NAN, false);
                } else {
                    b.push(Arm::Model, false, r.r_model, 0.0, f64::NAN, false);
                }
            }
        }
        Algorithm::Opt => {
            for ((r, p), v) in opt_rows.iter().zip(&opt.pi).zip(&opt_per_round) {
                let arm = if *p > 0.0 { Arm::Human } else { Arm::Model };
                b.push(arm, false, *v, p * r.cost, f64::NAN, false);
            }
            // The last fractional item is sized to the leftover budget; do not
            // let summation rounding report a sub-ulp overdraft.
            for row in &mut b.rows {
                row.remaining = row.remaining.max(0.0);
            }
        }
    }
    Ok(Episode {
        algorithm,
        feedback,
        label: episode_label(algorithm, feedback),
        budget,
        trial: data.trial,
        opt: opt.value,
        rows: b.rows,
    })
}

/// The (algorithm, feedback) pairs an experiment runs. Comparators do not
/// depend on the feedback mode and run once.
pub fn algorithm_plan(cfg: &ExperimentConfig) -> Vec<(Algorithm, FeedbackMode)> {
    let mut plan = Vec::new();
    for &a in &cfg.experiment.algorithms {
        if a.is_learner() {
            for &f in &cfg.experiment.feedback {
                if !plan.contains(&(a, f)) {
                    plan.push((a, f));
                }
            }
        } else if !plan.iter().any(|(b, _)| *b == a) {
            plan.push((a, cfg.experiment.feedback[0]));
        }
    }
    plan
}

/// Run every episode, handing each to `sink` on the calling thread as it
/// completes. Trials run in parallel.
fn execute(cfg: &ExperimentConfig, mut sink: impl FnMut(Episode) -> Result<()>) -> Result<()> {
    let source = Source::load(cfg)?;
    let horizon = source.horizon(cfg);
    let budgets = cfg.absolute_budgets(horizon);
    if let Some(b) = budgets.iter().find(|b| **b > horizon as f64) {
        return Err(Error::Config(format!("budget {b} exceeds the horizon {horizon}")));
    }
    let plan = algorithm_plan(cfg);
    let jobs: Vec<(Algorithm, FeedbackMode, f64)> = plan
        .iter()
        .flat_map(|&(a, f)| budgets.iter().map(move |&b| (a, f, b)))
        .collect();
    let (tx, rx) = mpsc::channel::<Result<Episode>>();
    let trials = cfg.trials();
    let mut outcome = Ok(());
    std::thread::scope(|scope| {
        let source = &source;
        let jobs = &jobs;
        scope.spawn(move || {
            (0..trials).into_par_iter().for_each_with(tx, |tx, trial| {
                let data = match trial_data(cfg, source, trial) {
                    Ok(d) => d,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        return;
                    }
                };
                jobs.par_iter().for_each_with(tx.clone(), |tx, &(a, f, b)| {
                    let _ = tx.send(run_episode_on(cfg, a, f, b, &data));
                });
            });
        });
        for msg in rx {
            if outcome.is_err() {
                continue;
            }
            outcome = msg.and_then(&mut sink);
        }
    });
    outcome
}

/// Run an experiment entirely in memory.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Episode>> {
    let mut episodes = Vec::new();
    execute(cfg, |e| {
        episodes.push(e);
        Ok(())
    })?;
    episodes.sort_by(|a, b| {
        a.label
            .cmp(&b.label)
            .then(a.budget.total_cmp(&b.budget))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(episodes)
}

/// What `run` leaves behind.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub summary: Vec<SummaryRow>,
    pub trace_files: usize,
    pub min_remaining: f64,
}

/// Run an experiment, writing one trace per episode and `summary.csv` to `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
    let fingerprint = cfg.fingerprint();
    let write_traces = !cfg.experiment.summary_only;
    let mut finals = Vec::new();
    let mut trace_files = 0;
    let mut min_remaining = f64::INFINITY;
    execute(cfg, |e| {
        min_remaining = min_remaining.min(e.min_remaining());
        if write_traces {
            let meta = TraceMeta {
                fingerprint: fingerprint.clone(),
                algorithm: e.label.clone(),
                budget: e.budget,
                trial: e.trial,
                horizon: e.rows.len(),
                opt: e.opt,
            };
            write_trace(&out.join(trace_file_name(&e.label, e.budget, e.trial)), &meta, &e.rows)?;
            trace_files += 1;
        }
        finals.push(e.to_final());
        Ok(())
    })?;
    let summary = summarize_finals(&finals)?;
    let path = out.join("summary.csv");
    std::fs::write(&path, summary_csv(&summary)).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(RunReport {
        out_dir: out.to_path_buf(),
        summary,
        trace_files,
        min_remaining,
    })
}

/// Regret curve sampled every `stride` rounds (and at the last round).
pub fn regret_curve(e: &Episode, stride: usize) -> Vec<(usize, f64)> {
    let n = e.rows.len();
    let mut pts: Vec<(usize, f64)> = (stride..=n).step_by(stride).map(|t| (t, e.regret_at(t))).collect();
    if pts.last().is_none_or(|p| p.0 != n) && n > 0 {
        pts.push((n, e.regret_at(n)));
    }
    pts
}
