use std::fmt;
use std::path::Path;

use rand::Rng as _;

use crate::rng;
use crate::{Error, Result};

/// A 0-1 knapsack problem with integer weights and values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub capacity: u64,
    pub weights: Vec<u64>,
    pub values: Vec<u64>,
}

impl KnapsackInstance {
    pub fn new(capacity: u64, weights: Vec<u64>, values: Vec<u64>) -> Result<Self> {
        if weights.len() != values.len() || weights.is_empty() {
            return Err(Error::Domain("weights and values must be non-empty and equal length".into()));
        }
        if weights.iter().chain(&values).any(|v| *v == 0) || capacity == 0 {
            return Err(Error::Domain("weights, values and capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            weights,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl fmt::Display for KnapsackInstance {
    /// `capacity; w1,…,wM; v1,…,vM`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{}; {}; {}", self.capacity, join(&self.weights), join(&self.values))
    }
}

impl std::str::FromStr for KnapsackInstance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected 3 ';'-separated fields, found {}", parts.len()));
        }
        let capacity = parts[0].parse::<u64>().map_err(|e| format!("capacity: {e}"))?;
        let list = |p: &str, name: &str| -> std::result::Result<Vec<u64>, String> {
            p.split(',')
                .map(|v| v.trim().parse::<u64>().map_err(|e| format!("{name}: {e}")))
                .collect()
        };
        let weights = list(parts[1], "weights")?;
        let values = list(parts[2], "values")?;
        KnapsackInstance::new(capacity, weights, values).map_err(|e| e.to_string())
    }
}

/// Weights and values uniform on {1..100}; capacity is half the total weight,
/// rounded (at least 1).
pub fn gen_knapsack_instance(seed: u64, items: usize) -> Result<KnapsackInstance> {
    if items == 0 {
        return Err(Error::Domain("knapsack instances need at least one item".into()));
    }
    let mut rng = rng::from_seed(seed);
    let weights: Vec<u64> = (0..items).map(|_| rng.random_range(1..=100)).collect();
    let values: Vec<u64> = (0..items).map(|_| rng.random_range(1..=100)).collect();
    let total: u64 = weights.iter().sum();
    let capacity = ((total as f64) * 0.5).round().max(1.0) as u64;
    KnapsackInstance::new(capacity, weights, values)
}

/// Context features for an instance: weights and values divided by capacity,
/// capacity / 1000, then min/max/mean/std of the scaled weights, scaled
/// values and value-weight ratios.
pub fn knapsack_features(inst: &KnapsackInstance) -> Vec<f64> {
    let cap = inst.capacity as f64;
    let w: Vec<f64> = inst.weights.iter().map(|v| *v as f64 / cap).collect();
    let v: Vec<f64> = inst.values.iter().map(|v| *v as f64 / cap).collect();
    let ratio: Vec<f64> = inst
        .values
        .iter()
        .zip(&inst.weights)
        .map(|(v, w)| *v as f64 / *w as f64)
        .collect();
    let mut out = Vec::with_capacity(2 * inst.len() + 13);
    out.extend(&w);
    out.extend(&v);
    out.push(cap / 1000.0);
    for series in [&w, &v, &ratio] {
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        out.push(series.iter().cloned().fold(f64::INFINITY, f64::min));
        out.push(series.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        out.push(mean);
        out.push(var.sqrt());
    }
    out
}

pub fn read_instances(path: &Path) -> Result<Vec<KnapsackInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.parse().map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message,
            })
        })
        .collect()
}

pub fn write_instances(path: &Path, instances: &[KnapsackInstance]) -> Result<()> {
    let mut text = String::new();
    for inst in instances {
        text.push_str(&inst.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
