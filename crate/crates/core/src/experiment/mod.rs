//! Multi-trial experiment harness: configuration, episode execution against
//! the empirical optimum, trace files and summaries.

mod config;
mod runner;
mod summary;
mod trace;

pub use config::{
    Algorithm, BudgetUnit, ExperimentConfig, ExperimentKind, ExperimentSection, NeuralSection, PolicySection, ReplaySection,
    SyntheticSection,
};
pub use runner::{
    algorithm_plan, episode_label, regret_curve, run, run_episode_on, shuffled_participant_order, simulate, trial_data, trial_seed, Episode,
    RunReport, Source, TrialData,
};
pub use summary::{mean_std, summarize, summarize_finals, summary_csv, EpisodeFinal, SummaryRow, SUMMARY_HEADER};
pub use trace::{list_traces, read_trace_tail, trace_file_name, write_trace, TraceMeta, TraceRow, TraceTail, TRACE_HEADER};
