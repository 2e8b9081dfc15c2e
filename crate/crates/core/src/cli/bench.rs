use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::manifest::RunManifest;
use super::{exit, CliError, CliResult};
use crate::fd_oracle::{fd_hessian_result, FdConfig};
use crate::hessian::HessianMethod;
use crate::hessian_bp2::{bp2_hessian, nc_value};
use crate::hessian_dp::dp_hessian_endpoint;
use crate::linalg::Matrix;
use crate::loss::{AtEndpoint, SquaredNorm};
use crate::ode::IntegratorConfig;
use crate::systems::{random_poly_system, RandomPoly, SystemTag};

#[derive(Debug, Args)]
pub(super) struct BenchArgs {
    /// State dimensions to time.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    dims: Vec<usize>,
    /// Seed for coefficients and start points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs per (dim, method); the fastest is reported.
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, value_delimiter = ',', default_value = "dp,bp2")]
    methods: Vec<HessianMethod>,
    /// Highest monomial order of the random rate function.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Integration end time.
    #[arg(long, default_value_t = 0.2)]
    t_max: f64,
    /// Integrator rtol and atol.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

/// One CSV line. Timing rows leave `agreement` empty; the `dp_vs_bp2` row
/// per dimension carries only `agreement`, the max-abs Hessian difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dim: usize,
    pub method: String,
    pub best_seconds: Option<f64>,
    pub checksum: Option<String>,
    pub agreement: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// First 16 hex digits of SHA-256 over the entries' bit patterns.
fn checksum(m: &Matrix) -> String {
    let mut h = Sha256::new();
    for v in m.as_slice() {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn endpoint_hessian(
    sys: &RandomPoly,
    y0: &[f64],
    t_max: f64,
    cfg: &IntegratorConfig,
    method: HessianMethod,
) -> crate::Result<Matrix> {
    Ok(match method {
        HessianMethod::Dp => {
            dp_hessian_endpoint(sys, &SquaredNorm, y0, 0.0, t_max, cfg, true)?.hessian_raw
        }
        HessianMethod::Bp2 => {
            bp2_hessian(sys, &AtEndpoint(SquaredNorm), y0, t_max, cfg)?.hessian_raw
        }
        HessianMethod::Fd => {
            let f = |x: &[f64]| nc_value(sys, &AtEndpoint(SquaredNorm), x, t_max, cfg);
            fd_hessian_result(f, y0, &FdConfig::default())?.hessian_raw
        }
    })
}

pub(super) fn run(
    args: BenchArgs,
    argv: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    if args.repeats == 0 || args.dims.is_empty() || args.methods.is_empty() {
        return Err(CliError::Usage(
            "--repeats, --dims and --methods must be non-empty".into(),
        ));
    }
    if args.dims.contains(&0) {
        return Err(CliError::Usage("--dims entries must be positive".into()));
    }
    let cfg = IntegratorConfig::rk45(args.tol);
    cfg.validate()?;
    let mut manifest = RunManifest::new("bench", argv);
    manifest.system = Some(SystemTag::Randpoly);
    manifest.t_final = Some(args.t_max);
    manifest.integrator = Some(cfg);
    manifest.method = Some(
        args.methods
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.seed = Some(args.seed);

    let mut rows = Vec::new();
    let mut failed = false;
    for &dim in &args.dims {
        let sys = random_poly_system(dim, args.order, args.seed);
        let y0 = sys.random_start(args.seed);
        let mut results: Vec<(HessianMethod, Matrix)> = Vec::new();
        // methods run one after another so timings don't compete
        for &method in &args.methods {
            let mut best = f64::INFINITY;
            let mut outcome = None;
            for _ in 0..args.repeats {
                let start = Instant::now();
                let r = endpoint_hessian(&sys, &y0, args.t_max, &cfg, method);
                best = best.min(start.elapsed().as_secs_f64());
                let stop = r.is_err();
                outcome = Some(r);
                if stop {
                    break;
                }
            }
            manifest.phases.push(super::Phase {
                name: format!("{method}/{dim}"),
                seconds: best,
            });
            match outcome.expect("repeats > 0") {
                Ok(h) => {
                    let _ = writeln!(err, "dim {dim:>4} {method:>3}: {best:.4e} s");
                    rows.push(BenchRow {
                        dim,
                        method: method.to_string(),
                        best_seconds: Some(best),
                        checksum: Some(checksum(&h)),
                        agreement: None,
                    });
                    results.push((method, h));
                }
                Err(e) => {
                    let _ = writeln!(err, "dim {dim:>4} {method:>3}: failed: {e}");
                    failed = true;
                    rows.push(BenchRow {
                        dim,
                        method: method.to_string(),
                        best_seconds: None,
                        checksum: Some("FAILED".into()),
                        agreement: None,
                    });
                }
            }
        }
        let find = |m| results.iter().find(|(k, _)| *k == m).map(|(_, h)| h);
        if let (Some(dp), Some(bp2)) = (find(HessianMethod::Dp), find(HessianMethod::Bp2)) {
            rows.push(BenchRow {
                dim,
                method: "dp_vs_bp2".into(),
                best_seconds: None,
                checksum: None,
                agreement: Some(dp.max_abs_diff(bp2)),
            });
        }
    }

    let mut w = csv::Writer::from_path(&args.out).map_err(|e| CliError::Io {
        path: args.out.clone(),
        source: e.into(),
    })?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Io {
            path: args.out.clone(),
            source: e.into(),
        })?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    manifest.write_beside(&args.out)?;

    let dp: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == "dp")
        .filter_map(|r| Some((r.dim as f64, r.best_seconds?)))
        .collect();
    if dp.len() >= 2 {
        let _ = writeln!(out, "dp log-log slope: {:.3}", loglog_slope(&dp));
    }
    let _ = writeln!(out, "{} row(s) -> {}", rows.len(), args.out.display());
    Ok(if failed { exit::SOLVER } else { exit::OK })
}
