use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::policy::Arm;
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "trial,t,arm,forced,reward,cost,remaining_budget,gamma,cumulative_reward,cumulative_regret";

/// One emitted round of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub trial: usize,
    pub t: u64,
    pub arm: Arm,
    pub forced: bool,
    pub reward: f64,
    pub cost: f64,
    pub remaining: f64,
    /// NaN for comparators that carry no price.
    pub gamma: f64,
    pub cumulative_reward: f64,
    pub cumulative_regret: f64,
}

/// Metadata stamped on the first line of each trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub fingerprint: String,
    pub algorithm: String,
    pub budget: f64,
    pub trial: usize,
    pub horizon: usize,
    pub opt: f64,
}

impl TraceMeta {
    fn to_comment(&self) -> String {
        format!(
            "# fingerprint={} algorithm={} budget={} trial={} horizon={} opt={} regret_reference=empirical_opt_of_realized_sequence",
            self.fingerprint, self.algorithm, self.budget, self.trial, self.horizon, self.opt
        )
    }

    fn parse(line: &str, path: &Path) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: m.to_string(),
        };
        let body = line.strip_prefix('#').ok_or_else(|| bad("missing trace header comment"))?;
        let get = |key: &str| -> Result<String> {
            body.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("header lacks {key}")))
        };
        let num = |s: String, key: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad {key}")));
        Ok(Self {
            fingerprint: get("fingerprint")?,
            algorithm: get("algorithm")?,
            budget: num(get("budget")?, "budget")?,
            trial: get("trial")?.parse().map_err(|_| bad("bad trial"))?,
            horizon: get("horizon")?.parse().map_err(|_| bad("bad horizon"))?,
            opt: num(get("opt")?, "opt")?,
        })
    }
}

pub fn trace_file_name(algorithm: &str, budget: f64, trial: usize) -> String {
    format!("trace_{algorithm}_{budget}_{trial}.csv")
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_trace(path: &Path, meta: &TraceMeta, rows: &[TraceRow]) -> Result<()> {
    let ctx = || format!("writing trace {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::with_capacity(rows.len() * 96 + 256);
    body.push_str(&meta.to_comment());
    body.push('\n');
    body.push_str(TRACE_HEADER);
    body.push('\n');
    for r in rows {
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.t,
            r.arm.as_str(),
            u8::from(r.forced),
            fmt_f(r.reward),
            fmt_f(r.cost),
            fmt_f(r.remaining),
            fmt_f(r.gamma),
            fmt_f(r.cumulative_reward),
            fmt_f(r.cumulative_regret),
        ));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(ctx(), e))?;
    w.flush().map_err(|e| Error::io(ctx(), e))
}

/// What the summary needs from a trace file: its header and final row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTail {
    pub meta: TraceMeta,
    pub final_reward: f64,
    pub final_regret: f64,
    pub min_remaining: f64,
}

pub fn read_trace_tail(path: &Path) -> Result<TraceTail> {
    let file = File::open(path).map_err(|e| Error::io(format!("reading trace {}", path.display()), e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = |n: u64| -> Result<Option<String>> {
        lines
            .next()
            .transpose()
            .map_err(|e| Error::io(format!("reading trace {} line {n}", path.display()), e))
    };
    let first = next(1)?.ok_or_else(|| Error::EmptyDataset(path.to_path_buf()))?;
    let meta = TraceMeta::parse(&first, path)?;
    let header = next(2)?.unwrap_or_default();
    if header != TRACE_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 2,
            message: format!("unexpected column header {header:?}"),
        });
    }
    let mut line_no = 2;
    let mut last: Option<Vec<String>> = None;
    let mut min_remaining = f64::INFINITY;
    while let Some(line) = next(line_no + 1)? {
        line_no += 1;
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != 10 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 10 fields, got {}", fields.len()),
            });
        }
        if let Ok(rem) = fields[6].parse::<f64>() {
            min_remaining = min_remaining.min(rem);
        }
        last = Some(fields);
    }
    let last = last.ok_or_else(|| Error::EmptyDataset(path.to_path_buf()))?;
    let parse = |i: usize| {
        last[i].parse::<f64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("bad number {:?}", last[i]),
        })
    };
    Ok(TraceTail {
        meta,
        final_reward: parse(8)?,
        final_regret: parse(9)?,
        min_remaining,
    })
}

/// All `trace_*.csv` files in `dir`, sorted by name.
pub fn list_traces(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(format!("listing {}", dir.display()), e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("trace_") && name.ends_with(".csv") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_tail() {
        let dir = tempfile::tempdir().unwrap();
        let meta = TraceMeta {
            fingerprint: "abc".into(),
            algorithm: "linear".into(),
            budget: 2.5,
            trial: 3,
            horizon: 2,
            opt: 1.75,
        };
        let row = |t, reward: f64, remaining, cum: f64| TraceRow {
            trial: 3,
            t,
            arm: Arm::Human,
            forced: false,
            reward,
            cost: 1.0,
            remaining,
            gamma: f64::NAN,
            cumulative_reward: cum,
            cumulative_regret: 1.75 * t as f64 / 2.0 - cum,
        };
        let path = dir.path().join(trace_file_name("linear", 2.5, 3));
        write_trace(&path, &meta, &[row(1, 0.5, 1.5, 0.5), row(2, 0.75, 0.5, 1.25)]).unwrap();
        assert!(path.ends_with("trace_linear_2.5_3.csv"));
        let tail = read_trace_tail(&path).unwrap();
        assert_eq!(tail.meta, meta);
        assert_eq!(tail.final_reward, 1.25);
        assert_eq!(tail.final_regret, 0.5);
        assert_eq!(tail.min_remaining, 0.5);
        assert_eq!(list_traces(dir.path()).unwrap(), vec![path]);
    }

    #[test]
    fn header_is_required() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace_x_1_0.csv");
        std::fs::write(&path, format!("{TRACE_HEADER}\n0,1,model,0,1,0,1,,1,0\n")).unwrap();
        assert!(matches!(read_trace_tail(&path), Err(Error::Parse { line: 1, .. })));
    }
}
