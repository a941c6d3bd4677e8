use crate::{Error, Result};

/// One round as seen by the static optimum: deferring gains `gain` over the
/// model's `base` reward and costs `cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptRow {
    pub gain: f64,
    pub cost: f64,
    pub base: f64,
}

impl OptRow {
    pub fn from_rewards(r_model: f64, r_human: f64, cost: f64) -> Self {
        Self {
            gain: r_human - r_model,
            cost,
            base: r_model,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptSolution {
    pub value: f64,
    /// Deferral fraction per round.
    pub pi: Vec<f64>,
    pub spent: f64,
}

impl OptSolution {
    /// Reward credited to the optimum on each round.
    pub fn per_round(&self, rows: &[OptRow]) -> Vec<f64> {
        rows.iter().zip(&self.pi).map(|(r, p)| r.base + p * r.gain).collect()
    }
}

/// Best per-round deferral fractions under `Σ π·cost ≤ budget`: the
/// fractional knapsack over positive-gain rounds, solved greedily by
/// gain/cost ratio.
pub fn opt_static_empirical(rows: &[OptRow], budget: f64) -> Result<OptSolution> {
    if !(budget >= 0.0) {
        return Err(Error::Domain(format!("budget must be >= 0, got {budget}")));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| !(r.cost >= 0.0)) {
        return Err(Error::Domain(format!("row {i} has negative cost {}", r.cost)));
    }
    let mut pi = vec![0.0; rows.len()];
    let mut candidates = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.gain > 0.0 {
            if r.cost == 0.0 {
                pi[i] = 1.0;
            } else {
                candidates.push(i);
            }
        }
    }
    candidates.sort_by(|&a, &b| {
        let ra = rows[a].gain / rows[a].cost;
        let rb = rows[b].gain / rows[b].cost;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });

    let mut spent = 0.0;
    for i in candidates {
        let remaining = budget - spent;
        if remaining <= 0.0 {
            break;
        }
        let c = rows[i].cost;
        if c <= remaining {
            pi[i] = 1.0;
            spent += c;
        } else {
            pi[i] = remaining / c;
            spent = budget;
            break;
        }
    }
    let value = rows.iter().zip(&pi).map(|(r, p)| r.base + p * r.gain).sum();
    Ok(OptSolution { value, pi, spent })
}
