//! `rotwave`: equilibria, symmetry extension, monotonicity checks, pinned
//! spectra and phase-reduction sweeps for rotating waves on square lattices
//! of coupled phase oscillators.
//!
//! Every run writes `manifest.json` to the output directory, also when it
//! fails or the command line does not parse. Exit status is 0 on success,
//! 1 on numerical failure and 2 on usage errors.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use config::{Command, Flags, RunConfig};
use rotwave::CouplingFunction;
use run::{Failure, Outputs};

#[derive(Debug, Parser)]
#[command(
    name = "rotwave",
    version,
    about = "Rotating waves on square lattices of coupled phase oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Ok,
    NumericalFailure,
    UsageError,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Option<Command>,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inputs: Option<&'a RunConfig>,
    seed: Option<u64>,
    wall_time_seconds: f64,
    outputs: &'a [String],
}

fn write_manifest(dir: &Path, manifest: &Manifest) {
    let text = rotwave::export::to_json(manifest);
    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("manifest.json"), text)) {
        eprintln!("rotwave: cannot write manifest: {e}");
    }
}

/// Output directory for a command line clap rejected: `--out` if present,
/// then the environment, then the default.
fn fallback_out_dir(args: &[String]) -> PathBuf {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if let Some(v) = a.strip_prefix("--out=") {
            return v.into();
        }
        if a == "--out" {
            if let Some(v) = it.next() {
                return v.into();
            }
        }
    }
    RunConfig::out_dir(&Flags::default())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            write_manifest(
                &fallback_out_dir(&args),
                &Manifest {
                    tool: "rotwave",
                    version: env!("CARGO_PKG_VERSION"),
                    command: None,
                    status: Status::UsageError,
                    error: Some(e.kind().to_string()),
                    inputs: None,
                    seed: None,
                    wall_time_seconds: start.elapsed().as_secs_f64(),
                    outputs: &[],
                },
            );
            return ExitCode::from(2);
        }
    };
    let manifest = |status: Status, error: Option<String>, inputs: Option<&RunConfig>, outputs: &[String]| {
        let dir = inputs.map_or_else(|| RunConfig::out_dir(&cli.flags), |c| c.out.clone());
        write_manifest(
            &dir,
            &Manifest {
                tool: "rotwave",
                version: env!("CARGO_PKG_VERSION"),
                command: Some(cli.command),
                status,
                error,
                inputs,
                seed: inputs.map(|c| c.seed),
                wall_time_seconds: start.elapsed().as_secs_f64(),
                outputs,
            },
        );
    };

    let resolved = RunConfig::resolve(cli.command, &cli.flags).and_then(|cfg| {
        CouplingFunction::by_name(&cfg.coupling)
            .map(|h| (cfg, h))
            .map_err(|e| e.to_string())
    });
    let (cfg, h) = match resolved {
        Ok(pair) => pair,
        Err(msg) => {
            eprintln!("rotwave: {msg}");
            manifest(Status::UsageError, Some(msg), None, &[]);
            return ExitCode::from(2);
        }
    };

    let mut outputs = match Outputs::new(cfg.out.clone()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("rotwave: cannot create {}: {e}", cfg.out.display());
            return ExitCode::from(1);
        }
    };
    match run::run(&cfg, &h, &mut outputs) {
        Ok(()) => {
            manifest(Status::Ok, None, Some(&cfg), &outputs.files);
            for f in &outputs.files {
                println!("{}", cfg.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rotwave: {e}");
            let status = match e {
                Failure::Numerical(_) | Failure::Io(_) => Status::NumericalFailure,
            };
            manifest(status, Some(e.to_string()), Some(&cfg), &outputs.files);
            ExitCode::from(1)
        }
    }
}
