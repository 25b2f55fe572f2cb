use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use metagen::benchkit::{
    build_inverse_tasks, build_reconstruction_tasks, build_understanding_tasks, eval_inverse, eval_reconstruction,
    eval_understanding, make_splits, read_jsonl, write_jsonl, ModelAssets, PropertyRanges, ReferenceDictionary,
    SplitSizes, TargetProfile, TaskRecord, TaskType,
};
use metagen::discretize::{voxelize, View, VoxelGrid};
use metagen::frontend::compile_program;
use metagen::homogenize::PropertyVector;
use metagen::metadb::{parse_header, render_file, resolve_path, Database, DbPath, PROPERTIES_FILE};

use crate::args::{BenchArgs, BenchCommand, Cli};
use crate::pipeline::{read, simulate_structure, write};

pub const RANGES_FILE: &str = "ranges.json";

pub fn run(cli: &Cli, a: &BenchArgs) -> Result<ExitCode> {
    match &a.command {
        BenchCommand::Build { out, seed, res, test, validate, corpus_ranges } => {
            let root = crate::db::root(cli)?;
            let out = out.clone().unwrap_or_else(|| root.join("benchmark"));
            build(&root, &out, *seed, res.get(), *test, *validate, *corpus_ranges)
        }
        BenchCommand::Eval { tasks, predictions, res, ranges, out } => {
            let ranges = match ranges {
                Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => PropertyRanges::default(),
            };
            let report = evaluate(cli.db.as_deref(), tasks, predictions, res.get(), &ranges)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            match out {
                Some(p) => write(p, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn model_assets(db: &Database, id: &str, res: usize) -> Result<ModelAssets> {
    let text = db.read_program(id)?;
    let (_, body) = parse_header(&text)?;
    let dir = db.model_dir(id);
    let props_path = dir.join(PROPERTIES_FILE);
    let properties = if props_path.is_file() {
        let v: Value = serde_json::from_str(&read(&props_path)?)?;
        Some(PropertyVector::from_json(&v).ok_or_else(|| anyhow!("{} is not a property map", props_path.display()))?)
    } else {
        None
    };
    let renders = View::ALL.map(|v| {
        let file = render_file(v);
        dir.join(&file).is_file().then(|| format!("/models/{id}/{file}"))
    });
    let grid = voxelize(&compile_program(&text, &BTreeMap::new()).map_err(|e| anyhow!("model {id}: {e}"))?, res)?;
    let voxel_ref = format!("/benchmark/voxels/{id}.json");
    write(&resolve_path(db.root(), Path::new(""), &DbPath::new(&voxel_ref), false)?, serde_json::to_string(&grid)?.as_bytes())?;
    Ok(ModelAssets {
        id: id.to_string(),
        source: Some(Database::model_ref(id).raw),
        renders,
        voxels: Some(voxel_ref),
        code: Some(body),
        properties,
    })
}

fn model_records(m: &ModelAssets, reference: &ReferenceDictionary, ranges: &PropertyRanges, seed: u64) -> Result<Vec<TaskRecord>> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.extend(build_reconstruction_tasks(m, n)?);
    }
    out.extend(build_understanding_tasks(m)?);
    out.extend(build_inverse_tasks(m, reference, ranges, seed)?);
    Ok(out)
}

fn build(root: &Path, out: &Path, seed: u64, res: usize, test: Option<usize>, validate: Option<usize>, corpus: bool) -> Result<ExitCode> {
    let db = Database::open(root)?;
    let ids = db.model_ids()?;
    if ids.is_empty() {
        bail!("the database at {} has no models", root.display());
    }
    let assets: Vec<ModelAssets> = ids.par_iter().map(|id| model_assets(&db, id, res)).collect::<Result<_>>()?;
    let reference = ReferenceDictionary::default();
    let ranges = if corpus {
        let samples: Vec<PropertyVector> = assets.iter().filter_map(|m| m.properties).collect();
        PropertyRanges::from_samples(&samples).ok_or_else(|| anyhow!("no model has simulated properties"))?
    } else {
        reference.ranges()
    };
    let records: BTreeMap<&str, Vec<TaskRecord>> = assets
        .par_iter()
        .map(|m| model_records(m, &reference, &ranges, seed).map(|r| (m.id.as_str(), r)))
        .collect::<Result<_>>()?;

    let proportional = SplitSizes::proportional(ids.len());
    let sizes = SplitSizes { test: test.unwrap_or(proportional.test), validate: validate.unwrap_or(proportional.validate) };
    let splits = make_splits(&ids, sizes, seed)?;
    let mut summary = serde_json::Map::new();
    for (name, members) in [("train", &splits.train), ("validate", &splits.validate), ("test", &splits.test)] {
        let mut by_type: BTreeMap<&str, Vec<TaskRecord>> = BTreeMap::new();
        for id in members {
            for r in &records[id.as_str()] {
                by_type.entry(r.task_type.name()).or_default().push(r.clone());
            }
        }
        let mut counts = serde_json::Map::new();
        let split_dir = out.join(name);
        std::fs::create_dir_all(&split_dir).with_context(|| format!("creating {}", split_dir.display()))?;
        for (task, recs) in &by_type {
            write_jsonl(recs, &split_dir.join(format!("{task}.jsonl")))?;
            counts.insert(task.to_string(), json!(recs.len()));
        }
        summary.insert(name.to_string(), json!({ "models": members.len(), "records": counts }));
    }
    write(&out.join(RANGES_FILE), serde_json::to_string_pretty(&ranges)?.as_bytes())?;
    write(&out.join("splits.json"), serde_json::to_string_pretty(&splits)?.as_bytes())?;
    println!("{}", serde_json::to_string_pretty(&Value::Object(summary))?);
    Ok(ExitCode::SUCCESS)
}

fn collect_task_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_task_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "jsonl") {
            out.push(p);
        }
    }
    Ok(())
}

/// Aggregate for one task type; metric means are over valid responses only.
#[derive(Debug, Default, Serialize)]
pub struct TaskSummary {
    pub count: usize,
    pub valid: usize,
    pub valid_rate: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<&'static str, f64>,
}

enum Outcome {
    Invalid,
    Scores(Vec<(&'static str, f64)>),
}

fn truth_grid(db: Option<&Path>, record: &TaskRecord) -> Result<VoxelGrid> {
    let root = db.ok_or_else(|| anyhow!("reconstruction scoring needs --db to locate ground truth"))?;
    if let Some(r) = record.data.get("voxels").and_then(Value::as_str) {
        let path = resolve_path(root, Path::new(""), &DbPath::new(r), true)?;
        return Ok(serde_json::from_str(&read(&path)?)?);
    }
    bail!("record {} has no ground-truth voxels", record.label)
}

fn score(
    db: Option<&Path>,
    record: &TaskRecord,
    prediction: Option<&Value>,
    simulated: &HashMap<&str, Option<PropertyVector>>,
    ranges: &PropertyRanges,
) -> Result<Outcome> {
    let Some(pred) = prediction else { return Ok(Outcome::Invalid) };
    let code = pred.get("code").and_then(Value::as_str);
    Ok(match record.task_type {
        TaskType::Reconstruction => {
            let truth = truth_grid(db, record)?;
            let guess = code
                .and_then(|c| compile_program(c, &BTreeMap::new()).ok())
                .and_then(|ir| voxelize(&ir, truth.resolution).ok());
            match guess.map(|g| eval_reconstruction(&g, &truth)) {
                Some(Ok(s)) => Outcome::Scores(vec![("iou", s.iou), ("chamfer", s.chamfer)]),
                _ => Outcome::Invalid,
            }
        }
        TaskType::MaterialUnderstanding => {
            let truth: BTreeMap<String, f64> = serde_json::from_value(record.data["properties"].clone())
                .with_context(|| format!("record {} has no property map", record.label))?;
            let guess: Option<BTreeMap<String, f64>> =
                pred.get("properties").and_then(|p| serde_json::from_value(p.clone()).ok());
            match guess.map(|g| eval_understanding(&g, &truth, ranges)) {
                Some(Ok(e)) => Outcome::Scores(vec![("error", e)]),
                _ => Outcome::Invalid,
            }
        }
        TaskType::InverseDesign => {
            let profile = TargetProfile {
                targets: serde_json::from_value(record.data["targets"].clone())
                    .with_context(|| format!("record {} has no targets", record.label))?,
            };
            match code.and_then(|c| simulated.get(c).copied().flatten()) {
                Some(props) => Outcome::Scores(vec![("error", eval_inverse(&profile, &props, ranges)?)]),
                None => Outcome::Invalid,
            }
        }
    })
}

pub fn evaluate(db: Option<&Path>, tasks: &Path, predictions: &Path, res: usize, ranges: &PropertyRanges) -> Result<BTreeMap<String, TaskSummary>> {
    let mut files = Vec::new();
    collect_task_files(tasks, &mut files)?;
    let mut records = Vec::new();
    for f in &files {
        records.extend(read_jsonl(f)?);
    }
    let mut preds: HashMap<String, Value> = HashMap::new();
    for (i, line) in read(predictions)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).with_context(|| format!("{}:{}", predictions.display(), i + 1))?;
        let label = v.get("label").and_then(Value::as_str).ok_or_else(|| anyhow!("{}:{}: missing label", predictions.display(), i + 1))?;
        preds.insert(label.to_string(), v);
    }

    // Simulate each distinct inverse-design program once.
    let mut codes: Vec<&str> = records
        .iter()
        .filter(|r| r.task_type == TaskType::InverseDesign)
        .filter_map(|r| preds.get(&r.label)?.get("code")?.as_str())
        .collect();
    codes.sort_unstable();
    codes.dedup();
    let simulated: HashMap<&str, Option<PropertyVector>> = codes
        .par_iter()
        .map(|c| {
            let props = compile_program(c, &BTreeMap::new()).ok().and_then(|ir| simulate_structure(&ir, res).ok()).map(|(_, _, p)| p);
            (*c, props)
        })
        .collect();

    let outcomes: Vec<Outcome> = records
        .par_iter()
        .map(|r| score(db, r, preds.get(&r.label), &simulated, ranges))
        .collect::<Result<_>>()?;

    let mut report: BTreeMap<String, TaskSummary> = BTreeMap::new();
    for (r, o) in records.iter().zip(&outcomes) {
        let s = report.entry(r.task_type.name().to_string()).or_default();
        s.count += 1;
        if let Outcome::Scores(values) = o {
            s.valid += 1;
            for (k, v) in values {
                *s.metrics.entry(k).or_insert(0.0) += v;
            }
        }
    }
    for s in report.values_mut() {
        s.valid_rate = s.valid as f64 / s.count as f64;
        for v in s.metrics.values_mut() {
            *v /= s.valid as f64;
        }
    }
    Ok(report)
}
