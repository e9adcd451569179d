use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;

use qle_cli::{run_file, CliError, Overrides};

/// Quantum Langevin toolkit: response, thermodynamics, radiating-electron
/// motion, diffusion, and a brute-force bath oracle.
#[derive(Parser, Debug)]
#[command(name = "qle", version)]
struct Cli {
    /// One of susceptibility, causality, free-energy, shift, welton,
    /// electron-motion, diffusion, oracle. Overrides the config's "command".
    command: Option<String>,

    /// JSON run config (a previous run's sidecar also works).
    #[arg(long)]
    config: PathBuf,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// dimensionless or cgs.
    #[arg(long)]
    units: Option<String>,

    /// 1 or 3; three dimensions triple free energies and shifts.
    #[arg(long)]
    dim: Option<u8>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.kind().as_str().unwrap_or("bad arguments");
            return fail(&CliError::config(format!("arguments: {msg}")));
        }
    };
    let overrides = Overrides {
        command: cli.command,
        out: cli.out,
        seed: cli.seed,
        units: cli.units,
        dim: cli.dim,
    };
    match run_file(&cli.config, &overrides) {
        Ok(a) => {
            println!("{}", a.csv.display());
            println!("{}", a.sidecar.display());
            for p in &a.extra {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}
