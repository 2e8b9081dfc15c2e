use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::manifest::{RunManifest, SCHEMA};
use super::{exit, write_json, CliError, CliResult, SystemArgs, ToleranceArgs};
use crate::error::Error;
use crate::hessian::HessianMethod;
use crate::orbit_lab::{
    deform_and_reconverge, find_orbit, min_track_separation, FindOrbitOptions, OrbitProblem,
    OrbitReport, Termination, DEFAULT_FLAT_THRESHOLD,
};
use crate::systems::{energy, SystemTag, ThreeBody};

#[derive(Debug, Args)]
pub(super) struct FindOrbitArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial guess: comma list or @file. Defaults to the system's preset.
    #[arg(long, allow_hyphen_values = true)]
    y0_init: Option<String>,
    /// Orbit time. Defaults to the system's preset.
    #[arg(long)]
    t_final: Option<f64>,
    /// Stop when the largest gradient component falls below this.
    #[arg(long, default_value_t = 1e-12)]
    gtol: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Hessian method for the spectrum at the solution.
    #[arg(long, default_value = "bp2")]
    method: HessianMethod,
    #[command(flatten)]
    tolerance: ToleranceArgs,
    #[arg(long, default_value_t = DEFAULT_FLAT_THRESHOLD)]
    flat_threshold: f64,
    /// Index (ascending order) of the eigenvector to deform along.
    #[arg(long, conflicts_with = "deform_near")]
    deform_eig: Option<usize>,
    /// Deform along the eigenvector whose eigenvalue is closest to this.
    #[arg(long, allow_hyphen_values = true)]
    deform_near: Option<f64>,
    /// Multiple of the unit eigenvector added to the solution.
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.02)]
    deform_step: f64,
    #[arg(long, default_value = "orbit.json")]
    out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub y0: Vec<f64>,
    pub nc_value: f64,
    pub grad_norm: f64,
    pub eigenvalues: Vec<f64>,
    pub n_flat: usize,
    pub n_calls: usize,
    pub iterations: usize,
    pub termination: Option<Termination>,
    pub energy: Option<f64>,
}

impl OrbitSummary {
    fn new(tag: SystemTag, r: &OrbitReport) -> Self {
        Self {
            y0: r.y0.clone(),
            nc_value: r.nc_value,
            grad_norm: r.grad_norm,
            eigenvalues: r.eigenvalues.clone(),
            n_flat: r.n_flat,
            n_calls: r.n_calls,
            iterations: r.iterations,
            termination: r.termination,
            energy: energy(tag, &r.y0).ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub eig_index: usize,
    pub eigenvalue: f64,
    pub step: f64,
    pub converged: bool,
    pub orbit: OrbitSummary,
    /// Smallest distance between two mass tracks (three-body only).
    pub min_track_separation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitOutput {
    pub schema: String,
    pub system: SystemTag,
    pub t_final: f64,
    pub converged: bool,
    pub orbit: OrbitSummary,
    pub deformation: Option<Deformation>,
}

/// Splits a solver result into (report, converged), keeping the best point
/// of a run that did not converge.
fn settle(r: crate::Result<OrbitReport>) -> CliResult<(OrbitReport, bool)> {
    match r {
        Ok(report) => Ok((report, true)),
        Err(Error::DidNotConverge { best, .. } | Error::LineSearchFailure { best, .. }) => {
            Ok((*best, false))
        }
        Err(Error::ReconvergedToOriginal { report, .. }) => Ok((*report, false)),
        Err(e) => Err(CliError::from(e)),
    }
}

pub(super) fn run(args: FindOrbitArgs, argv: &[String], out: &mut dyn Write) -> CliResult<i32> {
    let tag = args.system.system;
    let y0 = args.system.y0(args.y0_init.as_deref(), "y0-init")?;
    let t_final = args.system.t_final(args.t_final)?;
    let config = args.tolerance.config()?;
    let mut options = FindOrbitOptions::default().with_gtol(args.gtol);
    options.bfgs.max_iters = args.max_iters;
    options.hessian = args.method;
    options.flat_threshold = args.flat_threshold;

    let mut manifest = RunManifest::new("find-orbit", argv);
    manifest.system = Some(tag);
    manifest.dim = Some(y0.len());
    manifest.y0 = Some(y0.clone());
    manifest.t_final = Some(t_final);
    manifest.integrator = Some(config);
    manifest.method = Some(args.method.to_string());
    manifest.seed = (tag == SystemTag::Randpoly).then_some(args.system.seed);

    let problem = OrbitProblem::new(tag.build(y0.len(), args.system.seed), t_final, config);
    let (report, converged) =
        settle(manifest.time("find_orbit", || find_orbit(&problem, &y0, &options)))?;
    let _ = writeln!(
        out,
        "{tag}: nc {:e} after {} calls, {} flat{}",
        report.nc_value,
        report.n_calls,
        report.n_flat,
        if converged { "" } else { " (not converged)" }
    );

    let eig_index = match (args.deform_eig, args.deform_near) {
        (Some(k), _) => Some(k),
        (None, Some(target)) => Some(report.eigen_index_near(target)),
        (None, None) => None,
    };
    let mut all_converged = converged;
    let deformation = match eig_index {
        Some(k) if converged => {
            if k >= report.eigenvalues.len() {
                return Err(CliError::Usage(format!(
                    "--deform-eig {k} out of range for {} eigenvalues",
                    report.eigenvalues.len()
                )));
            }
            let r = manifest.time("deform", || {
                deform_and_reconverge(&problem, &report, k, args.deform_step, &options)
            });
            let (new, ok) = settle(r)?;
            all_converged &= ok;
            let separation = match tag {
                SystemTag::P3bp => {
                    let tr = problem.trajectory(&new.y0, 400)?;
                    Some(min_track_separation(&ThreeBody::tracks(&tr.states)))
                }
                _ => None,
            };
            let _ = writeln!(
                out,
                "deformed along eigenvalue {:e} by {}: nc {:e}{}",
                report.eigenvalues[k],
                args.deform_step,
                new.nc_value,
                if ok { "" } else { " (not converged)" }
            );
            Some(Deformation {
                eig_index: k,
                eigenvalue: report.eigenvalues[k],
                step: args.deform_step,
                converged: ok,
                orbit: OrbitSummary::new(tag, &new),
                min_track_separation: separation,
            })
        }
        _ => None,
    };

    let output = OrbitOutput {
        schema: SCHEMA.to_string(),
        system: tag,
        t_final,
        converged,
        orbit: OrbitSummary::new(tag, &report),
        deformation,
    };
    write_json(&args.out, &output)?;
    manifest.write_beside(&args.out)?;
    Ok(if all_converged {
        exit::OK
    } else {
        exit::NOT_CONVERGED
    })
}
