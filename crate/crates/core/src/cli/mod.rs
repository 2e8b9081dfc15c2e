//! The `hessode` command line.
//!
//! Every subcommand writes its output file plus a `<output>.manifest.json`
//! [`RunManifest`] recording the arguments, settings and phase timings.

mod bench;
mod find_orbit;
mod hessian;
mod manifest;
mod plot;
mod tcd_check;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::ode::IntegratorConfig;
use crate::systems::{presets, SystemTag};

pub use bench::{loglog_slope, BenchRow};
pub use find_orbit::{OrbitOutput, OrbitSummary};
pub use hessian::HessianOutput;
pub use manifest::{Phase, RunManifest, SCHEMA};
pub use plot::{position_tracks, render_svg};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => exit::USAGE,
            CliError::Solver(
                E::InvalidConfig(_) | E::DimensionMismatch { .. } | E::IndexOutOfRange { .. },
            ) => exit::USAGE,
            CliError::Solver(
                E::DidNotConverge { .. }
                | E::LineSearchFailure { .. }
                | E::ReconvergedToOriginal { .. },
            ) => exit::NOT_CONVERGED,
            CliError::Solver(_) => exit::SOLVER,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "hessode",
    version,
    about = "Gradients and Hessians through ODE solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Orbit nonclosure value, gradient and Hessian at one start point.
    Hessian(hessian::HessianArgs),
    /// Minimize orbit nonclosure with BFGS, optionally deforming along an
    /// eigenvector afterwards.
    FindOrbit(find_orbit::FindOrbitArgs),
    /// Draw position tracks as SVG.
    Plot(plot::PlotArgs),
    /// Time DP against BP2 on random polynomial ODEs.
    Bench(bench::BenchArgs),
    /// Check TCD notation in source files or documents.
    TcdCheck(tcd_check::TcdCheckArgs),
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let result = match cli.command {
        Command::Hessian(a) => hessian::run(a, &argv, out),
        Command::FindOrbit(a) => find_orbit::run(a, &argv, out),
        Command::Plot(a) => plot::run(a, &argv, out),
        Command::Bench(a) => bench::run(a, &argv, out, err),
        Command::TcdCheck(a) => tcd_check::run(a, &argv, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SystemArgs {
    /// ho3, kepler, p3bp or randpoly.
    #[arg(long)]
    system: SystemTag,
    /// State dimension (randpoly only).
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Coefficient seed (randpoly only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SystemArgs {
    fn dim(&self) -> usize {
        match self.system {
            SystemTag::Ho3 | SystemTag::Kepler => 6,
            SystemTag::P3bp => 12,
            SystemTag::Randpoly => self.dim,
        }
    }

    fn preset_y0(&self) -> Option<Vec<f64>> {
        match self.system {
            SystemTag::Ho3 => Some(presets::HO3_Y0.to_vec()),
            SystemTag::Kepler => Some(presets::KEPLER_Y0_INIT.to_vec()),
            SystemTag::P3bp => Some(presets::P3BP_Y0_INIT.to_vec()),
            SystemTag::Randpoly => None,
        }
    }

    fn preset_t(&self) -> Option<f64> {
        match self.system {
            SystemTag::Ho3 => Some(presets::HO3_T),
            SystemTag::Kepler => Some(presets::KEPLER_T),
            SystemTag::P3bp => Some(presets::P3BP_T),
            SystemTag::Randpoly => None,
        }
    }

    /// `flag` if given, else the system's preset start.
    fn y0(&self, flag: Option<&str>, name: &str) -> CliResult<Vec<f64>> {
        let y0 = match flag {
            Some(s) => parse_vector(s)?,
            None => self.preset_y0().ok_or_else(|| {
                CliError::Usage(format!("--{name} is required for {}", self.system))
            })?,
        };
        if y0.len() != self.dim() {
            return Err(CliError::Usage(format!(
                "--{name} has {} entries but {} needs {}",
                y0.len(),
                self.system,
                self.dim()
            )));
        }
        Ok(y0)
    }

    fn t_final(&self, flag: Option<f64>) -> CliResult<f64> {
        let t = flag
            .or_else(|| self.preset_t())
            .ok_or_else(|| CliError::Usage(format!("--t-final is required for {}", self.system)))?;
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Usage(format!(
                "--t-final must be finite and non-negative, got {t}"
            )));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Args)]
struct ToleranceArgs {
    /// Relative tolerance of the adaptive integrator.
    #[arg(long, default_value_t = 1e-12)]
    rtol: f64,
    /// Absolute tolerance of the adaptive integrator.
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
}

impl ToleranceArgs {
    fn config(&self) -> CliResult<IntegratorConfig> {
        let cfg = IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            ..IntegratorConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A comma-separated list of numbers, or `@path` naming a file with numbers
/// separated by commas and/or whitespace.
pub fn parse_vector(arg: &str) -> Result<Vec<f64>, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?,
        None => arg.to_string(),
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("not a finite number: '{s}'")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty vector '{arg}'")));
    }
    Ok(values)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("outputs serialize");
    write_file(path, &(text + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_from_comma_lists() {
        assert_eq!(parse_vector("1,-2.5, 3e-1").unwrap(), [1.0, -2.5, 0.3]);
        assert!(matches!(parse_vector("1,x"), Err(CliError::Usage(_))));
        assert!(matches!(parse_vector(""), Err(CliError::Usage(_))));
        assert!(matches!(parse_vector("1,nan"), Err(CliError::Usage(_))));
    }

    #[test]
    fn vectors_from_files() {
        let dir = std::env::temp_dir().join(format!("hessode-vec-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("y0.txt");
        std::fs::write(&p, "1 2\n3,4\n").unwrap();
        assert_eq!(
            parse_vector(&format!("@{}", p.display())).unwrap(),
            [1.0, 2.0, 3.0, 4.0]
        );
        assert!(matches!(
            parse_vector("@/no/such/file"),
            Err(CliError::Io { .. })
        ));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn exit_codes_by_error_kind() {
        let usage = CliError::Usage("x".into());
        assert_eq!(usage.exit_code(), exit::USAGE);
        let solver = CliError::Solver(crate::Error::NonFiniteState { t: 0.0 });
        assert_eq!(solver.exit_code(), exit::SOLVER);
    }
}
