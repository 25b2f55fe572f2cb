use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Reconstruction,
    InverseDesign,
    MaterialUnderstanding,
}

impl TaskType {
    pub fn name(self) -> &'static str {
        match self {
            TaskType::Reconstruction => "reconstruction",
            TaskType::InverseDesign => "inverse_design",
            TaskType::MaterialUnderstanding => "material_understanding",
        }
    }
}

/// One benchmark example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub task_type: TaskType,
    pub label: String,
    pub source: Option<String>,
    pub data: Map<String, Value>,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
}

pub fn write_jsonl(records: &[TaskRecord], path: &Path) -> Result<(), BenchError> {
    let io = |e: std::io::Error| BenchError::IoFailure(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| BenchError::IoFailure(e.to_string()))?;
        out.write_all(line.as_bytes()).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TaskRecord>, BenchError> {
    let io = |e: std::io::Error| BenchError::IoFailure(format!("{}: {e}", path.display()));
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| BenchError::MalformedLine { line: i + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub test: usize,
    pub validate: usize,
}

impl SplitSizes {
    /// 500 test and 50 validation models per 13,282, scaled to `n`.
    pub fn proportional(n: usize) -> Self {
        let scale = |k: f64| (n as f64 * k / 13_282.0).round() as usize;
        SplitSizes { test: scale(500.0), validate: scale(50.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub validate: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded partition of the (sorted, deduplicated) ids; at least one model is left for training.
pub fn make_splits(ids: &[String], sizes: SplitSizes, seed: u64) -> Result<Splits, BenchError> {
    let mut pool: Vec<String> = ids.to_vec();
    pool.sort();
    pool.dedup();
    let needed = sizes.test + sizes.validate + 1;
    if pool.len() < needed {
        return Err(BenchError::TooFewModels { needed, got: pool.len() });
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = pool.split_off(sizes.test + sizes.validate);
    let validate = pool.split_off(sizes.test);
    Ok(Splits { train, validate, test: pool })
}
