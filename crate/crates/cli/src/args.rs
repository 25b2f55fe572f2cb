use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "metagen", version, about = "Compile, simulate, validate and curate metamaterial programs")]
pub struct Cli {
    /// Database root.
    #[arg(long = "db", env = "METADB_ROOT", global = true)]
    pub db: Option<PathBuf>,
    /// Worker threads (0 picks automatically).
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and evaluate a program, printing its structure report.
    Compile(CompileArgs),
    /// Homogenize a program and write its elastic properties as JSON.
    Simulate(SimulateArgs),
    /// Extract a closed surface mesh as OBJ.
    Geom(GeomArgs),
    /// Render the four standard views as PNG.
    Render(RenderArgs),
    /// Run the compile, tiling and physical checks.
    Validate(ValidateArgs),
    /// Apply a seeded mutation and write the resulting program.
    Mutate(MutateArgs),
    /// Print the crossover prompt for two parent programs.
    HybridPrompt(HybridArgs),
    /// Database management.
    Db(DbArgs),
    /// Benchmark construction and scoring.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProgramArgs {
    pub file: PathBuf,
    /// Override a parameter default, as name=value.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ResolutionArg {
    /// Voxel grid resolution per axis.
    #[arg(long = "res", default_value_t = 32, value_parser = clap::value_parser!(u16).range(2..=512))]
    pub res: u16,
}

impl ResolutionArg {
    pub fn get(self) -> usize {
        usize::from(self.res)
    }
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    #[command(flatten)]
    pub res: ResolutionArg,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the 6x6 stiffness matrix here.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GeomArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    #[command(flatten)]
    pub res: ResolutionArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the voxel grid as JSON.
    #[arg(long)]
    pub voxels: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[command(flatten)]
    pub program: ProgramArgs,
    #[command(flatten)]
    pub res: ResolutionArg,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Image edge length in pixels.
    #[arg(long, default_value_t = 512)]
    pub size: usize,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub res: ResolutionArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MutateArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the mutation trace as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Database path recorded as the parent (defaults to the input path).
    #[arg(long)]
    pub parent: Option<String>,
    #[arg(long, default_value_t = 0.7)]
    pub p_swap_pathkind: f64,
    #[arg(long, default_value_t = 0.7)]
    pub p_swap_lift: f64,
    #[arg(long, default_value_t = 0.9)]
    pub p_vertex: f64,
    #[arg(long, default_value_t = 0.98)]
    pub p_thickness: f64,
}

#[derive(Args, Debug)]
pub struct HybridArgs {
    pub parent_a: PathBuf,
    pub parent_b: PathBuf,
}

#[derive(Args, Debug)]
pub struct DbArgs {
    #[command(subcommand)]
    pub command: DbCommand,
}

#[derive(Subcommand, Debug)]
pub enum DbCommand {
    /// Create the directory layout.
    Init,
    /// Validate a program and store it with its derived artifacts.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        id: String,
        #[command(flatten)]
        res: ResolutionArg,
        #[arg(long, default_value_t = 512)]
        size: usize,
    },
    /// Print the model index as JSON lines.
    List,
    /// Check that source links between models form no cycle.
    Check,
    /// Resolve a database path relative to a referring file.
    Resolve {
        path: String,
        /// Referring file, relative to the database root.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Run a program generator.
    Generate {
        generator: String,
        /// Generator argument as name=value; JSON values (including lists) are accepted.
        #[arg(long = "param", value_parser = parse_json_param)]
        params: Vec<(String, serde_json::Value)>,
        /// Write programs here instead of standard output.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub command: BenchCommand,
}

#[derive(Subcommand, Debug)]
pub enum BenchCommand {
    /// Build task records for every model in the database and split them.
    Build {
        /// Output directory (defaults to the database's benchmark folder).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        res: ResolutionArg,
        /// Test split size (defaults to the proportional rule).
        #[arg(long)]
        test: Option<usize>,
        /// Validation split size (defaults to the proportional rule).
        #[arg(long)]
        validate: Option<usize>,
        /// Derive coverage statistics from the database instead of the bundled reference.
        #[arg(long)]
        corpus_ranges: bool,
    },
    /// Score predictions against task records.
    Eval {
        /// Task JSONL file, or a directory searched recursively.
        #[arg(long)]
        tasks: PathBuf,
        /// Predictions JSONL: {label, code?, properties?}.
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        res: ResolutionArg,
        /// Coverage statistics written by `bench build` (bundled reference when absent).
        #[arg(long)]
        ranges: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn split_param(s: &str) -> anyhow::Result<(&str, &str)> {
    let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("expected name=value, got {s:?}"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(anyhow!("empty parameter name in {s:?}"));
    }
    Ok((k, v.trim()))
}

fn parse_param(s: &str) -> anyhow::Result<(String, f64)> {
    let (k, v) = split_param(s)?;
    let v: f64 = v.parse().with_context(|| format!("parameter {k} needs a number, got {v:?}"))?;
    Ok((k.to_string(), v))
}

fn parse_json_param(s: &str) -> anyhow::Result<(String, serde_json::Value)> {
    let (k, v) = split_param(s)?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
    Ok((k.to_string(), value))
}
