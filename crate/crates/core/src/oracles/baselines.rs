use rand::seq::SliceRandom;

use crate::rng;

/// Realized rewards and deferral cost of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardRow {
    pub r_model: f64,
    pub r_human: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    ModelOnly,
    HumanOnly,
    ArbitraryHuman,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub value: f64,
    pub deferred: Vec<bool>,
}

impl BaselineResult {
    fn from_mask(rows: &[RewardRow], deferred: Vec<bool>) -> Self {
        let value = rows
            .iter()
            .zip(&deferred)
            .map(|(r, d)| if *d { r.r_human } else { r.r_model })
            .sum();
        Self { value, deferred }
    }
}

/// Defer in row order whenever `wants(i)` holds, until a wanted deferral no
/// longer fits the budget; every later row takes the model.
fn defer_in_order(rows: &[RewardRow], budget: f64, wants: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut spent = 0.0;
    let mut exhausted = false;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if exhausted || !wants(i) {
                return false;
            }
            if spent + r.cost <= budget {
                spent += r.cost;
                true
            } else {
                exhausted = true;
                false
            }
        })
        .collect()
}

pub fn baseline(kind: BaselineKind, rows: &[RewardRow], budget: f64, seed: u64) -> BaselineResult {
    let mask = match kind {
        BaselineKind::ModelOnly => vec![false; rows.len()],
        BaselineKind::HumanOnly => defer_in_order(rows, budget, |_| true),
        BaselineKind::ArbitraryHuman => {
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(&mut rng::from_seed(seed));
            let mut mask = vec![false; rows.len()];
            let mut spent = 0.0;
            for i in order {
                if spent + rows[i].cost <= budget {
                    spent += rows[i].cost;
                    mask[i] = true;
                }
            }
            mask
        }
    };
    BaselineResult::from_mask(rows, mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestReject {
    pub threshold: f64,
    pub value: f64,
    pub deferred: Vec<bool>,
}

/// Sweep thresholds 0.00, 0.01, …, 1.00, deferring when the expected model
/// reward is below the threshold, and keep the best (lowest on ties).
pub fn best_reject(expected_model: &[f64], rows: &[RewardRow], budget: f64) -> BestReject {
    assert_eq!(expected_model.len(), rows.len(), "one expected reward per row");
    let mut best: Option<BestReject> = None;
    for k in 0..=100u32 {
        let threshold = f64::from(k) / 100.0;
        let mask = defer_in_order(rows, budget, |i| expected_model[i] < threshold);
        let result = BaselineResult::from_mask(rows, mask);
        if best.as_ref().is_none_or(|b| result.value > b.value) {
            best = Some(BestReject {
                threshold,
                value: result.value,
                deferred: result.deferred,
            });
        }
    }
    best.expect("sweep is non-empty")
}
