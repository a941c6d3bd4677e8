use std::cmp::Ordering;

use crate::environment::KnapsackInstance;
use crate::{Error, Result};

/// Largest item count solved by exhaustive subset enumeration.
pub const EXHAUSTIVE_MAX_ITEMS: usize = 25;
/// Largest capacity solved by the capacity-indexed dynamic program.
pub const DP_MAX_CAPACITY: u64 = 5_000_000;

/// Greedy by value/weight ratio, at most four picks. After each pick every
/// item that no longer fits is dropped; ratio ties go to the lower index.
pub fn ratiomax4(inst: &KnapsackInstance) -> u64 {
    let mut open: Vec<usize> = (0..inst.len()).filter(|&i| inst.weights[i] <= inst.capacity).collect();
    let (mut weight, mut value, mut picks) = (0u64, 0u64, 0);
    while !open.is_empty() && picks < 4 {
        let (pos, &best) = open
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                // v_a/w_a vs v_b/w_b, exactly, preferring the lower index on ties.
                let lhs = u128::from(inst.values[a]) * u128::from(inst.weights[b]);
                let rhs = u128::from(inst.values[b]) * u128::from(inst.weights[a]);
                lhs.cmp(&rhs).then(b.cmp(&a))
            })
            .expect("open is non-empty");
        open.swap_remove(pos);
        weight += inst.weights[best];
        value += inst.values[best];
        picks += 1;
        open.retain(|&j| weight + inst.weights[j] <= inst.capacity);
        open.sort_unstable();
    }
    value
}

/// Exact 0-1 knapsack optimum.
pub fn knapsack_exact(inst: &KnapsackInstance) -> Result<u64> {
    if inst.len() <= EXHAUSTIVE_MAX_ITEMS {
        Ok(exhaustive(inst))
    } else if inst.capacity <= DP_MAX_CAPACITY {
        Ok(dynamic_program(inst))
    } else {
        Err(Error::Capability(format!(
            "{} items with capacity {} exceeds both the exhaustive ({EXHAUSTIVE_MAX_ITEMS} items) \
             and dynamic-programming ({DP_MAX_CAPACITY}) limits",
            inst.len(),
            inst.capacity
        )))
    }
}

/// Visit every subset in Gray-code order, flipping one item per step.
fn exhaustive(inst: &KnapsackInstance) -> u64 {
    let n = inst.len();
    let (mut weight, mut value, mut best) = (0u64, 0u64, 0u64);
    let mut mask = 0u32;
    for step in 1u32..(1u32 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask & (1 << bit) != 0 {
            weight += inst.weights[bit];
            value += inst.values[bit];
        } else {
            weight -= inst.weights[bit];
            value -= inst.values[bit];
        }
        if weight <= inst.capacity && value > best {
            best = value;
        }
    }
    best
}

fn dynamic_program(inst: &KnapsackInstance) -> u64 {
    let cap = inst.capacity as usize;
    let mut table = vec![0u64; cap + 1];
    for (&w, &v) in inst.weights.iter().zip(&inst.values) {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            table[c] = table[c].max(table[c - w] + v);
        }
    }
    table[cap]
}

/// Reward `0.1 / (1.1 − V/V_max)` for a solution of value `V`.
pub fn knapsack_reward(value: f64, v_max: f64) -> Result<f64> {
    if !(v_max > 0.0) || !(value >= 0.0) {
        return Err(Error::Domain(format!("need 0 <= V and V_max > 0, got V = {value}, V_max = {v_max}")));
    }
    if value.partial_cmp(&v_max) == Some(Ordering::Greater) {
        return Err(Error::Domain(format!("V = {value} exceeds V_max = {v_max}")));
    }
    // 0.1/(1.1 - r) == 1/(11 - 10r), which is exact at r = 1.
    Ok(1.0 / (11.0 - 10.0 * (value / v_max)))
}
