use std::collections::BTreeMap;
use std::path::Path;

use super::trace::{list_traces, read_trace_tail};
use crate::{Error, Result};

pub const SUMMARY_HEADER: &str = "algorithm,budget,trials,reward_mean,reward_std,regret_mean,regret_std,opt_pct_mean,opt_pct_std";

/// Final numbers of one (algorithm, budget, trial) episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeFinal {
    pub algorithm: String,
    pub budget: f64,
    pub trial: usize,
    pub reward: f64,
    pub regret: f64,
    pub opt: f64,
}

impl EpisodeFinal {
    /// Reward as a percentage of OPT; 100 when both are zero.
    pub fn opt_pct(&self) -> f64 {
        if self.opt == 0.0 {
            if self.reward == 0.0 {
                100.0
            } else {
                f64::INFINITY
            }
        } else {
            100.0 * self.reward / self.opt
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub budget: f64,
    pub trials: usize,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub opt_pct_mean: f64,
    pub opt_pct_std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Group by (algorithm, budget), sorted by algorithm name then budget.
pub fn summarize_finals(finals: &[EpisodeFinal]) -> Result<Vec<SummaryRow>> {
    if finals.is_empty() {
        return Err(Error::Aggregation("no traces to summarize".into()));
    }
    let mut groups: BTreeMap<(String, u64), Vec<&EpisodeFinal>> = BTreeMap::new();
    for f in finals {
        groups.entry((f.algorithm.clone(), f.budget.to_bits())).or_default().push(f);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_values()
        .map(|g| {
            let col = |f: fn(&EpisodeFinal) -> f64| g.iter().map(|e| f(e)).collect::<Vec<_>>();
            let (reward_mean, reward_std) = mean_std(&col(|e| e.reward));
            let (regret_mean, regret_std) = mean_std(&col(|e| e.regret));
            let (opt_pct_mean, opt_pct_std) = mean_std(&col(EpisodeFinal::opt_pct));
            SummaryRow {
                algorithm: g[0].algorithm.clone(),
                budget: g[0].budget,
                trials: g.len(),
                reward_mean,
                reward_std,
                regret_mean,
                regret_std,
                opt_pct_mean,
                opt_pct_std,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.budget.total_cmp(&b.budget)));
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.algorithm, r.budget, r.trials, r.reward_mean, r.reward_std, r.regret_mean, r.regret_std, r.opt_pct_mean, r.opt_pct_std
        ));
    }
    out
}

/// Rebuild the summary table from the trace files in `dir` and write
/// `summary.csv` next to them.
pub fn summarize(dir: &Path) -> Result<Vec<SummaryRow>> {
    let paths = list_traces(dir)?;
    if paths.is_empty() {
        return Err(Error::Aggregation(format!("no trace files in {}", dir.display())));
    }
    let mut fingerprint: Option<String> = None;
    let mut finals = Vec::with_capacity(paths.len());
    for path in &paths {
        let tail = read_trace_tail(path)?;
        match &fingerprint {
            None => fingerprint = Some(tail.meta.fingerprint.clone()),
            Some(fp) if *fp != tail.meta.fingerprint => {
                return Err(Error::Aggregation(format!(
                    "{} was produced by config {} but earlier traces by {fp}",
                    path.display(),
                    tail.meta.fingerprint
                )))
            }
            Some(_) => {}
        }
        finals.push(EpisodeFinal {
            algorithm: tail.meta.algorithm,
            budget: tail.meta.budget,
            trial: tail.meta.trial,
            reward: tail.final_reward,
            regret: tail.final_regret,
            opt: tail.meta.opt,
        });
    }
    let rows = summarize_finals(&finals)?;
    let out = dir.join("summary.csv");
    std::fs::write(&out, summary_csv(&rows)).map_err(|e| Error::io(format!("writing {}", out.display()), e))?;
    Ok(rows)
}
