mod args;
mod bench;
mod db;
mod pipeline;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: could not configure the thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Compile(a) => pipeline::compile(a),
        Command::Simulate(a) => pipeline::simulate(a),
        Command::Geom(a) => pipeline::geom(a),
        Command::Render(a) => pipeline::render(a),
        Command::Validate(a) => pipeline::validate(a),
        Command::Mutate(a) => pipeline::mutate(a),
        Command::HybridPrompt(a) => pipeline::hybrid_prompt(a),
        Command::Db(a) => db::run(&cli, a),
        Command::Bench(a) => bench::run(&cli, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => match e.downcast_ref::<pipeline::Reported>() {
            Some(r) => ExitCode::from(r.0),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
    }
}
