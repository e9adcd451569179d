//! Config-driven front end for `qle-core`: runs one computation and writes a
//! CSV table plus a JSON sidecar that can be fed back in as a config.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{load_config, parse_config, read_config, RunConfig, Units};
pub use error::{CliError, ErrorKind};

/// Output directory used when neither the config nor the command line names one.
pub const DEFAULT_OUT_DIR: &str = "qle-out";

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub units: Option<String>,
    pub dim: Option<u8>,
}

pub fn apply_overrides(mut cfg: RunConfig, o: &Overrides) -> Result<RunConfig, CliError> {
    if let Some(c) = &o.command {
        cfg.command = c.clone();
    }
    if let Some(out) = &o.out {
        cfg.out = Some(out.clone());
    }
    if let Some(s) = o.seed {
        cfg.seed = Some(s);
    }
    if let Some(u) = &o.units {
        cfg.units = match u.as_str() {
            "dimensionless" => Units::Dimensionless,
            "cgs" => Units::Cgs,
            other => {
                return Err(CliError::config(format!(
                    "units: unknown unit system \"{other}\""
                )))
            }
        };
    }
    if let Some(d) = o.dim {
        cfg.dim = d;
    }
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from(DEFAULT_OUT_DIR));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub extra: Vec<PathBuf>,
}

/// Run a validated config and write its artifacts into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let dir: &Path = cfg.out.as_deref().unwrap_or(Path::new(DEFAULT_OUT_DIR));
    output::prepare_dir(dir)?;
    let result = commands::dispatch(cfg)?;
    let stem = cfg.stem();
    let csv = output::write_atomic(dir, &format!("{stem}.csv"), &result.table.to_csv()?)?;
    let mut extra = Vec::new();
    for (suffix, bytes) in &result.extra {
        extra.push(output::write_atomic(
            dir,
            &format!("{stem}.{suffix}"),
            bytes,
        )?);
    }
    let sidecar = output::write_atomic(
        dir,
        &format!("{stem}.json"),
        &output::sidecar(cfg, result.summary)?,
    )?;
    Ok(Artifacts {
        csv,
        sidecar,
        extra,
    })
}

/// Load, override, validate and run.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<Artifacts, CliError> {
    let cfg = apply_overrides(read_config(path)?, overrides)?;
    run(&cfg)
}
