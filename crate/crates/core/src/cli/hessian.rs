use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::manifest::{RunManifest, SCHEMA};
use super::{exit, write_json, CliError, CliResult, SystemArgs, ToleranceArgs};
use crate::hessian::HessianMethod;
use crate::orbit_lab::{analyze, OrbitProblem, DEFAULT_FLAT_THRESHOLD};
use crate::systems::SystemTag;

#[derive(Debug, Args)]
pub(super) struct HessianArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Start state: comma list or @file. Defaults to the system's preset.
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Orbit time. Defaults to the system's preset.
    #[arg(long)]
    t_final: Option<f64>,
    /// dp, bp2 or fd.
    #[arg(long, default_value = "bp2")]
    method: HessianMethod,
    #[command(flatten)]
    tolerance: ToleranceArgs,
    /// Eigenvalues below this fraction of the largest magnitude count as flat.
    #[arg(long, default_value_t = DEFAULT_FLAT_THRESHOLD)]
    flat_threshold: f64,
    /// Worker threads for BP2 rows and FD probes (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "hessian.json")]
    out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianOutput {
    pub schema: String,
    pub system: SystemTag,
    pub method: HessianMethod,
    pub y0: Vec<f64>,
    pub t_final: f64,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Ascending, of the symmetrized Hessian.
    pub eigenvalues: Vec<f64>,
    pub n_flat: usize,
    pub flat_threshold: f64,
    /// `|H − Hᵀ|∞` before symmetrization.
    pub asymmetry: f64,
    /// Rows of the Hessian as computed.
    pub hessian: Vec<Vec<f64>>,
}

pub(super) fn run(args: HessianArgs, argv: &[String], out: &mut dyn Write) -> CliResult<i32> {
    let y0 = args.system.y0(args.y0.as_deref(), "y0")?;
    let t_final = args.system.t_final(args.t_final)?;
    let config = args.tolerance.config()?;
    let mut manifest = RunManifest::new("hessian", argv);
    manifest.system = Some(args.system.system);
    manifest.dim = Some(y0.len());
    manifest.y0 = Some(y0.clone());
    manifest.t_final = Some(t_final);
    manifest.integrator = Some(config);
    manifest.method = Some(args.method.to_string());
    manifest.seed = (args.system.system == SystemTag::Randpoly).then_some(args.system.seed);

    let problem = OrbitProblem::new(
        args.system.system.build(y0.len(), args.system.seed),
        t_final,
        config,
    );
    let solve = || analyze(&problem, &y0, args.method, args.flat_threshold);
    let report = manifest.time("hessian", || match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--jobs {n}: {e}")))
            .and_then(|pool| pool.install(solve).map_err(CliError::from)),
        None => solve().map_err(CliError::from),
    })?;

    let output = HessianOutput {
        schema: SCHEMA.to_string(),
        system: args.system.system,
        method: args.method,
        y0,
        t_final,
        value: report.nc_value,
        gradient: report.gradient.clone(),
        eigenvalues: report.eigenvalues.clone(),
        n_flat: report.n_flat,
        flat_threshold: args.flat_threshold,
        asymmetry: report.hessian.asymmetry,
        hessian: report.hessian.hessian_raw.to_rows(),
    };
    write_json(&args.out, &output)?;
    manifest.write_beside(&args.out)?;
    let _ = writeln!(
        out,
        "{} {}: value {:e}, |grad| {:e}, lambda_max {:e}, {} flat -> {}",
        output.system,
        output.method,
        output.value,
        report.grad_norm,
        report.lambda_max(),
        output.n_flat,
        args.out.display()
    );
    Ok(exit::OK)
}
