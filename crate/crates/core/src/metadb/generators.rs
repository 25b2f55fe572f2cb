use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

use super::{record_provenance, write_header, HeaderBlock, MetaDbError, ProvenanceDetails, ProvenanceKind};

/// Named generator arguments; list values enumerate a family.
pub type GeneratorParams = BTreeMap<String, Value>;

/// Source of parameterized programs.
pub trait Generator: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, params: &GeneratorParams) -> Result<Vec<String>, MetaDbError>;
}

pub const GRID_FRAME_SCRIPT: &str = "/generators/grid_frame";

/// Cube-edge beam frames with cell size `1/2^k`, mirrored through the unit cell.
#[derive(Clone, Copy, Debug, Default)]
pub struct GridFrame;

const CORNERS: [&str; 8] = [
    "FRONT_BOTTOM_LEFT",
    "FRONT_BOTTOM_RIGHT",
    "FRONT_TOP_LEFT",
    "FRONT_TOP_RIGHT",
    "BACK_BOTTOM_LEFT",
    "BACK_BOTTOM_RIGHT",
    "BACK_TOP_LEFT",
    "BACK_TOP_RIGHT",
];
const EDGES: [[usize; 2]; 12] =
    [[0, 1], [0, 2], [2, 3], [1, 3], [4, 5], [4, 6], [6, 7], [5, 7], [0, 4], [2, 6], [3, 7], [1, 5]];

pub fn grid_frame_program(k_subdiv: u32, beam_d: f64) -> Result<String, MetaDbError> {
    let bad = |name: &str, message: &str| MetaDbError::InvalidParameter { name: name.into(), message: message.into() };
    if !(1..=6).contains(&k_subdiv) {
        return Err(bad("k_subdiv", "must be in 1..=6"));
    }
    let side = 0.5f64.powi(k_subdiv as i32);
    if !(beam_d > 0.0 && beam_d <= side) {
        return Err(bad("beam_d", "must be positive and at most the cell size"));
    }
    let details = ProvenanceDetails {
        script: Some(GRID_FRAME_SCRIPT.into()),
        arguments: Some(json!({ "k_subdiv": k_subdiv, "beam_d": beam_d })),
        structure_details: Some(json!({ "cell_size": side, "edges": EDGES.len() })),
        ..Default::default()
    };
    let header = HeaderBlock::from_mapping(record_provenance(ProvenanceKind::Generated, &details)?);

    let mut code = String::from("from metagen import *\n\n");
    code += &format!("def make_structure(beam_d={beam_d:?}) -> Structure:\n");
    for (i, c) in CORNERS.iter().enumerate() {
        code += &format!("    v{i} = vertex(cuboid.corners.{c})\n");
    }
    code += "\n";
    for (i, [a, b]) in EDGES.iter().enumerate() {
        code += &format!("    p{i} = Polyline([v{a}, v{b}])\n");
    }
    let paths: Vec<String> = (0..EDGES.len()).map(|i| format!("p{i}")).collect();
    code += &format!("\n    skel = skeleton([{}])\n", paths.join(", "));
    code += "    beams = UniformBeams(skel, beam_d)\n\n";
    code += &format!(
        "    embedding = cuboid.embed({side:?}, {side:?}, {side:?}, cornerAtAABBMin=cuboid.corners.FRONT_BOTTOM_LEFT)\n"
    );
    code += "    tile = Tile([beams], embedding)\n";
    code += "    pat = CuboidFullMirror()\n";
    code += "    obj = Structure(tile, pat)\n\n    return obj\n";
    Ok(format!("{}{}", write_header(&header), code))
}

/// Scalar or list parameter, as a list.
fn values(params: &GeneratorParams, name: &str, default: Value) -> Result<Vec<Value>, MetaDbError> {
    match params.get(name).cloned().unwrap_or(default) {
        Value::Array(items) if !items.is_empty() => Ok(items),
        Value::Array(_) => Err(MetaDbError::InvalidParameter { name: name.into(), message: "empty list".into() }),
        v => Ok(vec![v]),
    }
}

impl Generator for GridFrame {
    fn id(&self) -> &str {
        "grid_frame"
    }

    fn generate(&self, params: &GeneratorParams) -> Result<Vec<String>, MetaDbError> {
        if let Some(unknown) = params.keys().find(|k| !matches!(k.as_str(), "k_subdiv" | "beam_d")) {
            return Err(MetaDbError::InvalidParameter { name: unknown.clone(), message: "unknown parameter".into() });
        }
        let ks = values(params, "k_subdiv", json!(1))?;
        let ds = values(params, "beam_d", json!(0.06))?;
        let mut out = Vec::new();
        for k in &ks {
            let k = k.as_u64().ok_or_else(|| MetaDbError::InvalidParameter {
                name: "k_subdiv".into(),
                message: format!("expected a positive integer, got {k}"),
            })?;
            for d in &ds {
                let d = d.as_f64().ok_or_else(|| MetaDbError::InvalidParameter {
                    name: "beam_d".into(),
                    message: format!("expected a number, got {d}"),
                })?;
                out.push(grid_frame_program(k.min(u64::from(u32::MAX)) as u32, d)?);
            }
        }
        Ok(out)
    }
}

/// Generator backed by an executable. Parameters are passed as
/// `--name=value` (strings raw, everything else as JSON). Standard output is
/// either a JSON array of program texts or programs separated by form-feed lines.
#[derive(Clone, Debug)]
pub struct ExternalGenerator {
    pub id: String,
    pub executable: PathBuf,
    pub fixed_args: Vec<String>,
}

pub const PROGRAM_SEPARATOR: &str = "\x0c";

impl Generator for ExternalGenerator {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, params: &GeneratorParams) -> Result<Vec<String>, MetaDbError> {
        let fail = |message: String| MetaDbError::GeneratorFailed { id: self.id.clone(), message };
        let mut cmd = Command::new(&self.executable);
        cmd.args(&self.fixed_args);
        for (k, v) in params {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            cmd.arg(format!("--{k}={text}"));
        }
        let output = cmd.output().map_err(|e| fail(format!("{}: {e}", self.executable.display())))?;
        if !output.status.success() {
            return Err(fail(format!("{}: {}", output.status, String::from_utf8_lossy(&output.stderr).trim())));
        }
        let stdout = String::from_utf8(output.stdout).map_err(|e| fail(e.to_string()))?;
        if stdout.trim_start().starts_with('[') {
            return serde_json::from_str(&stdout).map_err(|e| fail(e.to_string()));
        }
        let mut programs = Vec::new();
        let mut current = String::new();
        for line in stdout.split_inclusive('\n') {
            if line.trim_end_matches(['\r', '\n']) == PROGRAM_SEPARATOR {
                programs.push(std::mem::take(&mut current));
            } else {
                current.push_str(line);
            }
        }
        programs.push(current);
        Ok(programs.into_iter().filter(|p| !p.trim().is_empty()).collect())
    }
}

/// Generators by id; the default registry holds the built-in grid frame.
pub struct GeneratorRegistry {
    generators: BTreeMap<String, Box<dyn Generator>>,
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        let mut r = GeneratorRegistry { generators: BTreeMap::new() };
        r.register(Box::new(GridFrame));
        r
    }
}

impl GeneratorRegistry {
    pub fn register(&mut self, generator: Box<dyn Generator>) {
        self.generators.insert(generator.id().to_string(), generator);
    }

    pub fn ids(&self) -> Vec<&str> {
        self.generators.keys().map(String::as_str).collect()
    }

    pub fn generate_family(&self, generator_id: &str, params: &GeneratorParams) -> Result<Vec<String>, MetaDbError> {
        self.generators
            .get(generator_id)
            .ok_or_else(|| MetaDbError::UnknownGenerator(generator_id.to_string()))?
            .generate(params)
    }
}

/// Run a generator from the default registry.
pub fn generate_family(generator_id: &str, params: &GeneratorParams) -> Result<Vec<String>, MetaDbError> {
    GeneratorRegistry::default().generate_family(generator_id, params)
}
