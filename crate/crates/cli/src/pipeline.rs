use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde_json::json;

use metagen::assembly::{transpile_report, StructureIR};
use metagen::augment::{build_hybrid_prompt, emit_program, mutate as mutate_structure, MutationConfig};
use metagen::discretize::{extract_mesh, obj_string, render_views, voxelize, View, VoxelGrid};
use metagen::frontend::{compile_program, list_params, parse_program, SourceProgram, API_DESCRIPTION};
use metagen::homogenize::{extract_properties, homogenize, BaseMaterial, PropertyVector, StiffnessTensor};
use metagen::metadb::{parse_header, properties_json, record_provenance, render_file, write_header, HeaderBlock};
use metagen::metadb::{ProvenanceDetails, ProvenanceKind};
use metagen::quality::validate_model;

use crate::args::{
    CompileArgs, GeomArgs, HybridArgs, MutateArgs, ProgramArgs, RenderArgs, SimulateArgs, ValidateArgs,
};

/// Exit status for failures already reported on standard error.
#[derive(Debug)]
pub struct Reported(pub u8);

impl fmt::Display for Reported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exit status {}", self.0)
    }
}

impl std::error::Error for Reported {}

pub const EXIT_SOLVER: u8 = 2;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Write to a file, or to standard output when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Compile a program file, reporting diagnostics as `file:line:col`.
pub fn load(args: &ProgramArgs) -> Result<StructureIR> {
    let text = read(&args.file)?;
    let overrides: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    compile_program(&text, &overrides).map_err(|e| {
        eprintln!("{}", e.to_diagnostic().render(&args.file.display().to_string()));
        Reported(1).into()
    })
}

pub fn compile(a: &CompileArgs) -> Result<ExitCode> {
    let ir = load(&a.program)?;
    print!("{}", transpile_report(&ir));
    Ok(ExitCode::SUCCESS)
}

/// Voxelize, homogenize and reduce to properties; solver failures exit with status 2.
pub fn simulate_structure(ir: &StructureIR, res: usize) -> Result<(VoxelGrid, StiffnessTensor, PropertyVector)> {
    let grid = voxelize(ir, res)?;
    let solved = homogenize(&grid, &BaseMaterial::default())
        .and_then(|c| extract_properties(&c, grid.volume_fraction()).map(|p| (c, p)));
    match solved {
        Ok((c, p)) => Ok((grid, c, p)),
        Err(e) => {
            eprintln!("error: simulation failed: {e}");
            Err(Reported(EXIT_SOLVER).into())
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let ir = load(&a.program)?;
    let (_, tensor, props) = simulate_structure(&ir, a.res.get())?;
    if let Some(path) = &a.tensor {
        write(path, serde_json::to_string_pretty(&json!({ "C": tensor.rows() }))?.as_bytes())?;
    }
    emit(a.out.as_deref(), &properties_json(&props))?;
    Ok(ExitCode::SUCCESS)
}

pub fn geom(a: &GeomArgs) -> Result<ExitCode> {
    let ir = load(&a.program)?;
    let mesh = extract_mesh(&ir, a.res.get())?;
    write(&a.out, obj_string(&mesh).as_bytes())?;
    if let Some(path) = &a.voxels {
        write(path, serde_json::to_string(&voxelize(&ir, a.res.get())?)?.as_bytes())?;
    }
    eprintln!("{} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len());
    Ok(ExitCode::SUCCESS)
}

pub fn render(a: &RenderArgs) -> Result<ExitCode> {
    let ir = load(&a.program)?;
    let mesh = extract_mesh(&ir, a.res.get())?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (view, image) in View::ALL.iter().zip(render_views(&mesh, a.size)) {
        let path = a.out_dir.join(render_file(*view));
        image.save_png(&path)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    let text = read(&a.file)?;
    let report = validate_model(&SourceProgram::new(&text), a.res.get());
    for d in &report.diagnostics {
        eprintln!("{}", d.render(&a.file.display().to_string()));
    }
    for reason in [&report.tilable_reason, &report.physical_reason].into_iter().flatten() {
        eprintln!("{}: {reason}", a.file.display());
    }
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    emit(a.out.as_deref(), &body)?;
    Ok(if report.overall { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

pub fn mutate(a: &MutateArgs) -> Result<ExitCode> {
    let text = read(&a.file)?;
    parse_header(&text)?;
    let program = ProgramArgs { file: a.file.clone(), params: Vec::new() };
    let ir = load(&program)?;
    let params = list_params(&parse_program(&text)?)?;
    let cfg = MutationConfig {
        p_swap_pathkind: a.p_swap_pathkind,
        p_swap_lift: a.p_swap_lift,
        p_vertex: a.p_vertex,
        p_thickness: a.p_thickness,
        seed: a.seed,
    };
    let (child, trace) = mutate_structure(&ir, &cfg)?;
    let parent = a.parent.clone().unwrap_or_else(|| a.file.display().to_string());
    let details = ProvenanceDetails {
        parents: vec![parent],
        trace: Some(serde_json::to_value(&trace)?),
        arguments: Some(serde_json::to_value(cfg)?),
        ..Default::default()
    };
    let header = HeaderBlock::from_mapping(record_provenance(ProvenanceKind::Mutated, &details)?);
    let out = format!("{}{}", write_header(&header), emit_program(&child, Some(&params)));
    if let Some(path) = &a.trace {
        write(path, serde_json::to_string_pretty(&trace)?.as_bytes())?;
    }
    emit(a.out.as_deref(), &out)?;
    for r in &trace.applied {
        eprintln!("{:?} {}: {} -> {}", r.axis, r.site, r.old, r.new);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn hybrid_prompt(a: &HybridArgs) -> Result<ExitCode> {
    let (_, body_a) = parse_header(&read(&a.parent_a)?)?;
    let (_, body_b) = parse_header(&read(&a.parent_b)?)?;
    println!("{}", build_hybrid_prompt(&body_a, &body_b, API_DESCRIPTION));
    Ok(ExitCode::SUCCESS)
}
