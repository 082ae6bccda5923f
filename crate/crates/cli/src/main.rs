mod args;
mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::{CliError, CliResult, Outcome};

fn name(command: &Command) -> &'static str {
    match command {
        Command::Resistance(_) => "resistance",
        Command::Spectral(_) => "spectral",
        Command::Lattice(_) => "lattice",
        Command::Walk(_) => "walk",
        Command::Verify(_) => "verify",
        Command::Generate(_) => "generate",
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(()),
    }
}

fn run(cli: &Cli, argv: &[String], start: Instant) -> CliResult<bool> {
    configure_threads(cli.threads)?;
    let outcome: Outcome = match &cli.command {
        Command::Resistance(a) => commands::resistance(a)?,
        Command::Spectral(a) => commands::spectral(a)?,
        Command::Lattice(a) => commands::lattice(a)?,
        Command::Walk(a) => commands::walk(a)?,
        Command::Verify(a) => commands::verify(a)?,
        Command::Generate(a) => {
            println!("{}", commands::generate(a)?);
            return Ok(true);
        }
    };
    if let Some(dir) = &cli.out_dir {
        commands::write_csv(dir, &outcome.csv)?;
    }
    let report = json!({
        "command": name(&cli.command),
        "argv": argv,
        "status": if outcome.ok { "ok" } else { "failed" },
        "inputs": outcome.inputs,
        "outputs": outcome.outputs,
        "provenance": outcome.provenance,
        "csv_files": outcome.csv.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        "timing": { "wall_seconds": start.elapsed().as_secs_f64() },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, &argv, start) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if !matches!(e, CliError::Usage(_)) {
                let body = json!({
                    "command": name(&cli.command),
                    "argv": argv,
                    "status": "error",
                    "error": { "kind": e.kind(), "message": e.to_string() },
                });
                println!("{}", serde_json::to_string_pretty(&body).expect("report serializes"));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
