use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

/// One logged decision opportunity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRow {
    pub participant_id: String,
    pub features: Vector,
    pub r_human: f64,
    pub r_model: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplaySchema {
    /// Knapsack instances answered by participants; the model arm is a greedy
    /// heuristic and the cost is time spent.
    KnapsackHuman,
    /// Image classification by participants against a pretrained classifier;
    /// costs are normalized to mean one on load.
    #[serde(rename = "imagenet16h")]
    ImageNet16H,
}

/// Load a replay CSV (`participant_id, f0..f{d-1}, r_human, r_model, cost`).
///
/// Rows keep file order. Two per-participant running features are appended
/// to each row: the participant's mean cost and mean human reward over their
/// earlier rows (0 on a participant's first row). For ImageNet16H the cost
/// column is rescaled to mean one before those features are computed.
pub fn load_replay(path: &Path, schema: ReplaySchema) -> Result<Vec<ReplayRow>> {
    let mut rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    if schema == ReplaySchema::ImageNet16H {
        let mean = rows.iter().map(|r| r.cost).sum::<f64>() / rows.len() as f64;
        if mean > 0.0 {
            for r in &mut rows {
                r.cost /= mean;
            }
        }
    }
    append_running_features(&mut rows);
    Ok(rows)
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_rows(path: &Path) -> Result<Vec<ReplayRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Config(format!("cannot open replay file {}: {e}", path.display())),
            _ => Error::Csv(e),
        })?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let dim = check_header(path, &header)?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 4 {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", dim + 4, record.len())));
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = record[i]
                .parse()
                .map_err(|_| parse_err(path, line, format!("column {} is not a number: {:?}", &header[i], &record[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(path, line, format!("column {} is not finite", &header[i])))
            }
        };
        let features = Vector::from_iterator(dim, (1..=dim).map(num).collect::<Result<Vec<_>>>()?);
        let r_human = num(dim + 1)?;
        let r_model = num(dim + 2)?;
        let cost = num(dim + 3)?;
        if !(0.0..=1.0).contains(&r_human) || !(0.0..=1.0).contains(&r_model) {
            return Err(parse_err(path, line, "rewards must lie in [0,1]"));
        }
        if cost < 0.0 {
            return Err(parse_err(path, line, "cost must be >= 0"));
        }
        rows.push(ReplayRow {
            participant_id: record[0].to_string(),
            features,
            r_human,
            r_model,
            cost,
        });
    }
    Ok(rows)
}

fn check_header(path: &Path, header: &csv::StringRecord) -> Result<usize> {
    let n = header.len();
    if n < 4 {
        return Err(parse_err(path, 1, "header needs participant_id, features, r_human, r_model, cost"));
    }
    let dim = n - 4;
    let ok = &header[0] == "participant_id"
        && (0..dim).all(|i| header[i + 1] == format!("f{i}"))
        && &header[n - 3] == "r_human"
        && &header[n - 2] == "r_model"
        && &header[n - 1] == "cost";
    if !ok {
        return Err(parse_err(
            path,
            1,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    Ok(dim)
}

fn append_running_features(rows: &mut [ReplayRow]) {
    // participant -> (rows seen, cost sum, human reward sum)
    let mut seen: HashMap<String, (usize, f64, f64)> = HashMap::new();
    for row in rows.iter_mut() {
        let entry = seen.entry(row.participant_id.clone()).or_insert((0, 0.0, 0.0));
        let (mean_cost, mean_acc) = if entry.0 == 0 {
            (0.0, 0.0)
        } else {
            (entry.1 / entry.0 as f64, entry.2 / entry.0 as f64)
        };
        let d = row.features.len();
        let mut extended = Vector::zeros(d + 2);
        extended.rows_mut(0, d).copy_from(&row.features);
        extended[d] = mean_cost;
        extended[d + 1] = mean_acc;
        row.features = extended;
        entry.0 += 1;
        entry.1 += row.cost;
        entry.2 += row.r_human;
    }
}

/// Write rows in the replay CSV layout (features as stored, no derived columns).
pub fn write_replay(path: &Path, rows: &[ReplayRow]) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.features.len());
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["participant_id".to_string()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    header.extend(["r_human", "r_model", "cost"].map(String::from));
    writer.write_record(&header)?;
    for row in rows {
        if row.features.len() != dim {
            return Err(Error::Domain("replay rows differ in feature dimension".into()));
        }
        let mut rec = vec![row.participant_id.clone()];
        rec.extend(row.features.iter().map(|v| v.to_string()));
        rec.extend([row.r_human, row.r_model, row.cost].map(|v| v.to_string()));
        writer.write_record(&rec)?;
    }
    writer.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}
