use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};

use metagen::metadb::{
    ingest_model_with, resolve_path, Database, DbPath, GeneratorParams, GeneratorRegistry, IngestOptions,
};

use crate::args::{Cli, DbArgs, DbCommand};
use crate::pipeline::{read, write};

pub fn root(cli: &Cli) -> Result<PathBuf> {
    cli.db.clone().ok_or_else(|| anyhow!("no database given: pass --db or set METADB_ROOT"))
}

pub fn run(cli: &Cli, a: &DbArgs) -> Result<ExitCode> {
    let root = root(cli)?;
    match &a.command {
        DbCommand::Init => {
            Database::create(&root)?;
            eprintln!("initialized {}", root.display());
        }
        DbCommand::Ingest { file, id, res, size } => {
            let db = Database::open(&root)?;
            let opts = IngestOptions { resolution: res.get(), image_size: *size, ..Default::default() };
            let outcome = ingest_model_with(&db, &read(file)?, id, &opts)?;
            println!("{}", serde_json::to_string(&outcome.report)?);
            match outcome.entry {
                Some(entry) => eprintln!("stored {} in {}", id, entry.dir.display()),
                None => {
                    for d in &outcome.report.diagnostics {
                        eprintln!("{}", d.render(&file.display().to_string()));
                    }
                    for reason in [&outcome.report.tilable_reason, &outcome.report.physical_reason].into_iter().flatten() {
                        eprintln!("{}: {reason}", file.display());
                    }
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        DbCommand::List => {
            for row in Database::open(&root)?.list_models()? {
                println!("{}", serde_json::to_string(&row)?);
            }
        }
        DbCommand::Check => {
            Database::open(&root)?.check_provenance_acyclic()?;
            eprintln!("provenance graph is acyclic");
        }
        DbCommand::Resolve { path, from } => {
            println!("{}", resolve_path(&root, from.as_deref().unwrap_or(std::path::Path::new("")), &DbPath::new(path), false)?.display());
        }
        DbCommand::Generate { generator, params, out_dir } => {
            let params: GeneratorParams = params.iter().cloned().collect();
            let programs = GeneratorRegistry::default().generate_family(generator, &params)?;
            match out_dir {
                Some(dir) => {
                    for (i, p) in programs.iter().enumerate() {
                        let path = dir.join(format!("{generator}_{i:04}.py"));
                        write(&path, p.as_bytes())?;
                        println!("{}", path.display());
                    }
                }
                None => {
                    let sep = format!("{}\n", metagen::metadb::PROGRAM_SEPARATOR);
                    print!("{}", programs.join(&sep));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
