//! Library side of the `witnesskit` binary, so the commands can be driven
//! in-process by tests.

pub mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::path::Path;

use witnesskit::{Error, ProjectionConfig, SolverConfig};

pub use args::{AlphaSpec, Cli, Command, CommonArgs, Format};

/// Exit status for a finished run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

/// Rendered output of a command plus the rows that did not converge.
pub(crate) struct Report {
    pub body: String,
    pub unconverged: Vec<String>,
}

/// Runs a parsed command, writing results to `--output` or `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let output = match &cli.command {
        Command::GammaSigns { output, .. } => output.clone(),
        Command::IsoSweep { common, .. }
        | Command::WitnessCheck { common, .. }
        | Command::Measure { common, .. }
        | Command::Bnt { common, .. }
        | Command::ChshScan { common, .. } => common.output.clone(),
    };
    let report = match commands::execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
            return match e {
                CliError::Domain(ref d) if d.is_convergence_failure() => EXIT_NO_CONVERGENCE,
                _ => EXIT_DOMAIN,
            };
        }
    };
    let written = match output {
        Some(path) => write_file(&path, &report.body),
        None => out
            .write_all(report.body.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
        return EXIT_DOMAIN;
    }
    for row in &report.unconverged {
        let _ = writeln!(err, "warning: {row} converged=false");
    }
    if report.unconverged.is_empty() {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Solver settings: defaults, then `--config`, then individual flags.
pub fn solver_config(common: &CommonArgs) -> Result<SolverConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_json::from_str(&text).map_err(Error::from)?
        }
        None => SolverConfig::default(),
    };
    if let Some(n) = common.n_starts {
        cfg.n_starts = n;
    }
    if let Some(n) = common.max_iters {
        cfg.max_iters = n;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn projection_config(common: &CommonArgs) -> Result<ProjectionConfig, CliError> {
    let mut cfg = ProjectionConfig {
        solver: solver_config(common)?,
        ..ProjectionConfig::default()
    };
    if let Some(t) = common.tol_gap {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Usage("--tol-gap must be positive".into()));
        }
        cfg.tol_gap = t;
    }
    if let Some(n) = common.max_outer_iters {
        if n == 0 {
            return Err(CliError::Usage("--max-outer-iters must be positive".into()));
        }
        cfg.max_outer_iters = n;
    }
    Ok(cfg)
}
