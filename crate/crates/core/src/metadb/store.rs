use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_header, resolve_path, DbPath, MetaDbError};
use crate::discretize::{extract_mesh, obj_string, render_views, View, DEFAULT_IMAGE_SIZE};
use crate::frontend::SourceProgram;
use crate::homogenize::BaseMaterial;
use crate::quality::{validate_model_detailed, ValidationReport};

pub const LAYOUT_DIRS: [&str; 4] = ["literature", "models", "generators", "benchmark"];
pub const INDEX_FILE: &str = "index.jsonl";
pub const PROGRAM_FILE: &str = "model.py";
pub const GEOMETRY_FILE: &str = "geometry.obj";
pub const PROPERTIES_FILE: &str = "properties.json";
pub const VALIDATION_FILE: &str = "validation.json";

pub fn render_file(view: View) -> String {
    format!("render_{}.png", view.name())
}

/// A database directory with the standard layout.
#[derive(Clone, Debug)]
pub struct Database {
    root: PathBuf,
}

/// One line of the model index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub id: String,
    pub program: String,
    pub resolution: usize,
    pub volume_fraction: f64,
    pub sources: Vec<String>,
}

/// Files belonging to an ingested model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub id: String,
    pub dir: PathBuf,
    pub program: PathBuf,
    pub geometry: PathBuf,
    pub renders: Vec<PathBuf>,
    pub properties: PathBuf,
    pub validation: PathBuf,
}

impl ModelEntry {
    fn at(id: &str, dir: PathBuf) -> Self {
        ModelEntry {
            id: id.to_string(),
            program: dir.join(PROGRAM_FILE),
            geometry: dir.join(GEOMETRY_FILE),
            renders: View::ALL.iter().map(|v| dir.join(render_file(*v))).collect(),
            properties: dir.join(PROPERTIES_FILE),
            validation: dir.join(VALIDATION_FILE),
            dir,
        }
    }

    /// Program file followed by every derived artifact.
    pub fn files(&self) -> Vec<&Path> {
        let mut out = vec![self.program.as_path(), self.geometry.as_path()];
        out.extend(self.renders.iter().map(PathBuf::as_path));
        out.push(&self.properties);
        out.push(&self.validation);
        out
    }
}

#[derive(Clone, Debug)]
pub struct IngestOutcome {
    pub report: ValidationReport,
    /// Present only when validation passed and the files were written.
    pub entry: Option<ModelEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    pub resolution: usize,
    pub image_size: usize,
    pub base: BaseMaterial,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { resolution: 32, image_size: DEFAULT_IMAGE_SIZE, base: BaseMaterial::default() }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Model id named by a `/models/<id>/...` reference.
fn model_id_of(path: &str) -> Option<&str> {
    path.strip_prefix("/models/")?.split('/').next().filter(|s| !s.is_empty())
}

impl Database {
    /// Create the layout directories (existing ones are kept).
    pub fn create(root: &Path) -> Result<Database, MetaDbError> {
        for dir in LAYOUT_DIRS {
            fs::create_dir_all(root.join(dir)).map_err(|e| MetaDbError::io(root.join(dir).display(), e))?;
        }
        Ok(Database { root: root.to_path_buf() })
    }

    pub fn open(root: &Path) -> Result<Database, MetaDbError> {
        if !root.is_dir() {
            return Err(MetaDbError::NotFound(root.display().to_string()));
        }
        Ok(Database { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn model_dir(&self, id: &str) -> PathBuf {
        self.root.join("models").join(id)
    }

    pub fn model_ref(id: &str) -> DbPath {
        DbPath::new(&format!("/models/{id}/{PROGRAM_FILE}"))
    }

    pub fn entry(&self, id: &str) -> Option<ModelEntry> {
        let dir = self.model_dir(id);
        dir.join(PROGRAM_FILE).is_file().then(|| ModelEntry::at(id, dir))
    }

    pub fn resolve(&self, referrer: &Path, target: &DbPath, must_exist: bool) -> Result<PathBuf, MetaDbError> {
        resolve_path(&self.root, referrer, target, must_exist)
    }

    pub fn read_program(&self, id: &str) -> Result<String, MetaDbError> {
        let path = self.model_dir(id).join(PROGRAM_FILE);
        fs::read_to_string(&path).map_err(|e| MetaDbError::io(path.display(), e))
    }

    /// Rows of the index file; a missing index is an empty database.
    pub fn list_models(&self) -> Result<Vec<IndexRow>, MetaDbError> {
        let path = self.root.join(INDEX_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(MetaDbError::io(path.display(), e)),
        };
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| MetaDbError::io(path.display(), e)))
            .collect()
    }

    /// Model ids found on disk, sorted.
    pub fn model_ids(&self) -> Result<Vec<String>, MetaDbError> {
        let dir = self.root.join("models");
        let mut ids = Vec::new();
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(ids),
            Err(e) => return Err(MetaDbError::io(dir.display(), e)),
        };
        for entry in entries {
            let entry = entry.map_err(|e| MetaDbError::io(dir.display(), e))?;
            if entry.path().join(PROGRAM_FILE).is_file() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Model-to-model source links, keyed by model id.
    pub fn provenance_graph(&self) -> Result<BTreeMap<String, Vec<String>>, MetaDbError> {
        let mut graph = BTreeMap::new();
        for id in self.model_ids()? {
            let (header, _) = parse_header(&self.read_program(&id)?)?;
            let parents = header.sources().iter().filter_map(|s| model_id_of(s).map(str::to_string)).collect();
            graph.insert(id, parents);
        }
        Ok(graph)
    }

    /// Fails with the first model found on a cycle of source links.
    pub fn check_provenance_acyclic(&self) -> Result<(), MetaDbError> {
        let graph = self.provenance_graph()?;
        let mut done = BTreeSet::new();
        for start in graph.keys() {
            let mut on_path = BTreeSet::new();
            let mut stack = vec![(start.as_str(), 0usize)];
            on_path.insert(start.as_str());
            while let Some((node, next)) = stack.pop() {
                let children = graph.get(node).map(Vec::as_slice).unwrap_or(&[]);
                if let Some(child) = children.get(next) {
                    stack.push((node, next + 1));
                    if on_path.contains(child.as_str()) {
                        return Err(MetaDbError::ProvenanceCycle(child.clone()));
                    }
                    if !done.contains(child.as_str()) {
                        on_path.insert(child);
                        stack.push((child, 0));
                    }
                } else {
                    on_path.remove(node);
                    done.insert(node);
                }
            }
        }
        Ok(())
    }

    fn append_index(&self, row: &IndexRow) -> Result<(), MetaDbError> {
        let path = self.root.join(INDEX_FILE);
        let mut line = serde_json::to_string(row).map_err(|e| MetaDbError::io(path.display(), e))?;
        line.push('\n');
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| MetaDbError::io(path.display(), e))?;
        f.write_all(line.as_bytes()).map_err(|e| MetaDbError::io(path.display(), e))
    }
}

pub fn ingest_model(db: &Database, program_text: &str, id: &str) -> Result<IngestOutcome, MetaDbError> {
    ingest_model_with(db, program_text, id, &IngestOptions::default())
}

/// Validate a program and, if it passes, store it with its derived artifacts.
/// A failing program leaves the database untouched.
pub fn ingest_model_with(db: &Database, program_text: &str, id: &str, opts: &IngestOptions) -> Result<IngestOutcome, MetaDbError> {
    if !valid_id(id) {
        return Err(MetaDbError::InvalidId(id.to_string()));
    }
    let dir = db.model_dir(id);
    if dir.exists() {
        return Err(MetaDbError::DuplicateId(id.to_string()));
    }
    let (header, _) = parse_header(program_text)?;
    let referrer = Path::new("models").join(id).join(PROGRAM_FILE);
    for source in header.sources() {
        if model_id_of(&source) == Some(id) {
            return Err(MetaDbError::ProvenanceCycle(id.to_string()));
        }
        if model_id_of(&source).is_some() {
            db.resolve(&referrer, &DbPath::new(&source), true)?;
        }
    }

    let validation = validate_model_detailed(&SourceProgram::new(program_text), opts.resolution, &opts.base);
    let report = validation.report;
    let (Some(ir), Some(props), Some(grid)) = (validation.structure, validation.properties, validation.grid) else {
        return Ok(IngestOutcome { report, entry: None });
    };
    if !report.overall {
        return Ok(IngestOutcome { report, entry: None });
    }
    let mesh = extract_mesh(&ir, opts.resolution).map_err(|e| MetaDbError::Pipeline(e.to_string()))?;
    let images = render_views(&mesh, opts.image_size);

    // Creating the directory claims the id; a concurrent ingest loses here.
    fs::create_dir_all(db.root.join("models")).map_err(|e| MetaDbError::io(db.root.display(), e))?;
    match fs::create_dir(&dir) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(MetaDbError::DuplicateId(id.to_string())),
        Err(e) => return Err(MetaDbError::io(dir.display(), e)),
    }
    let entry = ModelEntry::at(id, dir.clone());
    let write_all = || -> Result<(), MetaDbError> {
        let put = |path: &Path, bytes: &[u8]| fs::write(path, bytes).map_err(|e| MetaDbError::io(path.display(), e));
        put(&entry.program, program_text.as_bytes())?;
        put(&entry.geometry, obj_string(&mesh).as_bytes())?;
        for (img, path) in images.iter().zip(&entry.renders) {
            img.save_png(path).map_err(|e| MetaDbError::Pipeline(e.to_string()))?;
        }
        put(&entry.properties, properties_json(&props).as_bytes())?;
        let report_json = serde_json::to_string_pretty(&report).map_err(|e| MetaDbError::Pipeline(e.to_string()))?;
        put(&entry.validation, report_json.as_bytes())?;
        db.append_index(&IndexRow {
            id: id.to_string(),
            program: Database::model_ref(id).raw,
            resolution: opts.resolution,
            volume_fraction: grid.volume_fraction(),
            sources: header.sources(),
        })
    };
    if let Err(e) = write_all() {
        let _ = fs::remove_dir_all(&dir);
        return Err(e);
    }
    Ok(IngestOutcome { report, entry: Some(entry) })
}

/// Canonical text of a properties file.
pub fn properties_json(props: &crate::homogenize::PropertyVector) -> String {
    let mut text = serde_json::to_string_pretty(&props.to_json(false)).unwrap_or_default();
    text.push('\n');
    text
}
