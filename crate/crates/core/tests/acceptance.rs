//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hessode::adjoint::backprop_gradient;
use hessode::cli::{self, loglog_slope, BenchRow};
use hessode::fd_oracle::{fd_hessian, verified_grad, FdConfig};
use hessode::hessian_bp2::{bp2_hessian, nc_value};
use hessode::hessian_dp::dp_hessian_endpoint;
use hessode::linalg::max_abs;
use hessode::loss::{AtEndpoint, L2Loss, SquaredNorm, TwoPointLoss};
use hessode::orbit_lab::{
    analyze, deform_and_reconverge, find_orbit, min_track_separation, FindOrbitOptions,
    OrbitProblem,
};
use hessode::systems::{presets, random_poly_system, RandomPoly, SystemTag, ThreeBody};
use hessode::{integrate, HessianMethod, IntegratorConfig, OdeSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcd_dsl::{check_document, check_source, Code, Mode, Severity};

type Outcome = Result<String, String>;

/// Name, check, time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn c1_harmonic() -> Outcome {
    let problem = OrbitProblem::new(
        SystemTag::Ho3.build(6, 0),
        presets::HO3_T,
        IntegratorConfig::rk45(1e-12),
    );
    let r =
        analyze(&problem, &presets::HO3_Y0, HessianMethod::Bp2, 1e-8).map_err(|e| e.to_string())?;
    ensure(r.nc_value < 1e-12, || format!("nc {:e}", r.nc_value))?;
    ensure(r.grad_norm < 1e-7, || format!("|g| {:e}", r.grad_norm))?;
    ensure(r.lambda_max() < 1e-6, || {
        format!("|λ|max {:e}", r.lambda_max())
    })?;
    Ok(format!(
        "nc {:.2e}, |g| {:.2e}, |λ|max {:.2e}",
        r.nc_value,
        r.grad_norm,
        r.lambda_max()
    ))
}

fn c2_kepler() -> Outcome {
    let problem = OrbitProblem::new(
        SystemTag::Kepler.build(6, 0),
        presets::KEPLER_T,
        IntegratorConfig::rk45(1e-12),
    );
    let opts = FindOrbitOptions::default().with_gtol(1e-12);
    let r = find_orbit(&problem, &presets::KEPLER_Y0_INIT, &opts).map_err(|e| e.to_string())?;
    let energy = hessode::systems::energy(SystemTag::Kepler, &r.y0).map_err(|e| e.to_string())?;
    let lmax = r.lambda_max();
    let small = r
        .eigenvalues
        .iter()
        .filter(|l| l.abs() < 1e-3 * lmax)
        .count();
    ensure(r.nc_value < 1e-14, || format!("nc {:e}", r.nc_value))?;
    ensure((energy + 0.5).abs() < 1e-6, || format!("energy {energy}"))?;
    ensure(small == 5, || {
        format!("{small} eigenvalues below 1e-3·λmax")
    })?;
    ensure(within(lmax, 331.2668, 0.01), || format!("λmax {lmax}"))?;
    Ok(format!(
        "nc {:.2e}, E {energy:.9}, {small} small, λmax {lmax:.4}, {} calls",
        r.nc_value, r.n_calls
    ))
}

fn c3_three_body() -> Outcome {
    let problem = OrbitProblem::new(
        SystemTag::P3bp.build(12, 0),
        presets::P3BP_T,
        IntegratorConfig::rk45(1e-12),
    );
    let opts = FindOrbitOptions::default();
    let r = find_orbit(&problem, &presets::P3BP_Y0_INIT, &opts).map_err(|e| e.to_string())?;
    let ev = &r.eigenvalues;
    let n = ev.len();
    ensure(r.nc_value < 1e-14, || format!("nc {:e}", r.nc_value))?;
    ensure(r.n_flat == 4, || format!("{} flat directions", r.n_flat))?;
    ensure(within(ev[n - 1], 1.053e4, 0.02), || {
        format!("λmax {}", ev[n - 1])
    })?;
    ensure(within(ev[n - 2], 2.626e3, 0.02), || {
        format!("λ2 {}", ev[n - 2])
    })?;
    // the smallest eigenvalue in magnitude outside the flat set
    let mut by_size: Vec<usize> = (0..n).collect();
    by_size.sort_by(|&a, &b| ev[a].abs().total_cmp(&ev[b].abs()));
    let k = by_size[r.n_flat];
    ensure(ev[k] > 0.0 && within(ev[k], 5.96e-4, 0.5), || {
        format!("small eigenvalue {}", ev[k])
    })?;

    let new = deform_and_reconverge(&problem, &r, k, -0.02, &opts).map_err(|e| e.to_string())?;
    let tr = problem
        .trajectory(&new.y0, 400)
        .map_err(|e| e.to_string())?;
    let sep = min_track_separation(&ThreeBody::tracks(&tr.states));
    ensure(new.nc_value < 1e-14, || {
        format!("deformed nc {:e}", new.nc_value)
    })?;
    ensure(sep > 1e-3, || format!("track separation {sep:e}"))?;
    Ok(format!(
        "nc {:.2e}, 4 flat, λ {:.5e} {:.5e} {:.3e}; deformed nc {:.2e}, separation {sep:.3e}",
        r.nc_value,
        ev[n - 1],
        ev[n - 2],
        ev[k],
        new.nc_value
    ))
}

fn endpoint_hessians(
    sys: &RandomPoly,
    y0: &[f64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(hessode::Matrix, hessode::Matrix), String> {
    let dp =
        dp_hessian_endpoint(sys, &SquaredNorm, y0, 0.0, t, cfg, true).map_err(|e| e.to_string())?;
    let bp2 = bp2_hessian(sys, &AtEndpoint(SquaredNorm), y0, t, cfg).map_err(|e| e.to_string())?;
    Ok((dp.hessian_raw, bp2.hessian_raw))
}

fn endpoint_fd(
    sys: &RandomPoly,
    y0: &[f64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<hessode::Matrix, String> {
    let f = |x: &[f64]| nc_value(sys, &AtEndpoint(SquaredNorm), x, t, cfg);
    fd_hessian(f, y0, FdConfig::default().eps_hess).map_err(|e| e.to_string())
}

fn c4_method_agreement() -> Outcome {
    let mut report = Vec::new();
    for (i, dim) in [10, 30, 50].into_iter().enumerate() {
        let sys = random_poly_system(dim, 2, 100 + i as u64);
        let y0 = sys.random_start(100 + i as u64);
        let (dp, bp2) = endpoint_hessians(&sys, &y0, 0.2, &IntegratorConfig::rk45(1e-10))?;
        let agree = dp.max_abs_diff(&bp2);
        ensure(agree < 1e-9, || format!("dim {dim}: dp vs bp2 {agree:e}"))?;
        let loose = IntegratorConfig::rk45(1e-5);
        let (dp5, bp25) = endpoint_hessians(&sys, &y0, 0.2, &loose)?;
        let fd = endpoint_fd(&sys, &y0, 0.2, &loose)?;
        let (e_dp, e_bp2) = (dp5.max_abs_diff(&fd), bp25.max_abs_diff(&fd));
        ensure(e_dp < 1e-3 && e_bp2 < 1e-3, || {
            format!("dim {dim}: fd vs dp {e_dp:e}, vs bp2 {e_bp2:e}")
        })?;
        report.push(format!("D={dim} {agree:.1e}/{:.1e}", e_dp.max(e_bp2)));
    }
    Ok(format!("dp-bp2/fd: {}", report.join(", ")))
}

fn c5_ablation() -> Outcome {
    let sys = random_poly_system(10, 2, 7);
    let y0 = sys.random_start(7);
    let cfg = IntegratorConfig::rk45(1e-10);
    let full = dp_hessian_endpoint(&sys, &SquaredNorm, &y0, 0.0, 0.2, &cfg, true)
        .map_err(|e| e.to_string())?;
    let ablated = dp_hessian_endpoint(&sys, &SquaredNorm, &y0, 0.0, 0.2, &cfg, false)
        .map_err(|e| e.to_string())?;
    let fd = endpoint_fd(&sys, &y0, 0.2, &cfg)?;
    let grad = max_abs(&full.gradient);
    let (e_full, e_abl) = (
        full.hessian_raw.max_abs_diff(&fd),
        ablated.hessian_raw.max_abs_diff(&fd),
    );
    ensure(grad > 0.0, || "zero endpoint gradient".into())?;
    ensure(e_full < 1e-3, || format!("full dp vs fd {e_full:e}"))?;
    ensure(e_abl > 1e-3, || format!("ablated dp vs fd {e_abl:e}"))?;
    Ok(format!(
        "|σ| {grad:.2e}; full {e_full:.1e}, ablated {e_abl:.1e}"
    ))
}

/// A start state well away from collisions, and an orbit time.
fn random_point(tag: SystemTag, rng: &mut ChaCha8Rng) -> (Box<dyn OdeSystem>, Vec<f64>, f64) {
    let mut u = |s: f64| rng.random_range(-s..s);
    match tag {
        SystemTag::Ho3 => {
            let y = (0..6).map(|_| u(2.0)).collect();
            (tag.build(6, 0), y, 1.0 + u(0.5))
        }
        SystemTag::Kepler => {
            // near-circular: radius about 1, tangential speed about 1
            let (phi, r) = (u(3.0), 1.0 + u(0.2));
            let y = vec![
                r * phi.cos(),
                r * phi.sin(),
                u(0.1),
                -phi.sin() + u(0.1),
                phi.cos() + u(0.1),
                u(0.1),
            ];
            (tag.build(6, 0), y, 1.0 + u(0.5))
        }
        SystemTag::P3bp => {
            let y = presets::P3BP_Y0_INIT.iter().map(|v| v + u(0.05)).collect();
            (tag.build(12, 0), y, 0.5 + u(0.3))
        }
        SystemTag::Randpoly => {
            let seed = rng.random::<u64>() % 1000;
            let sys = random_poly_system(6, 2, seed);
            let y = sys.random_start(seed);
            (Box::new(sys), y, 0.2)
        }
    }
}

fn c6_gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = IntegratorConfig::rk45(1e-10);
    let fd = FdConfig {
        rtol: 0.1,
        atol: 1e-3,
        ..FdConfig::default()
    };
    for i in 0..50 {
        let tag = SystemTag::ALL[i % 4];
        let (sys, y0, t) = random_point(tag, &mut rng);
        let f = |x: &[f64]| nc_value(&sys, &L2Loss, x, t, &cfg);
        let grad = |x: &[f64]| {
            let y1 = integrate(&sys, x, 0.0, t, &cfg)?.endpoint;
            let back = backprop_gradient(&sys, &y1, &L2Loss.t1(x, &y1), t, 0.0, &cfg)?;
            Ok(L2Loss
                .t0(x, &y1)
                .iter()
                .zip(&back.sigma)
                .map(|(a, b)| a + b)
                .collect())
        };
        verified_grad(f, grad, fd)(&y0).map_err(|e| format!("point {i} ({tag}): {e}"))?;
    }
    Ok("50 points over ho3, kepler, p3bp, randpoly".into())
}

const NEGATIVES: [(&str, Code, usize, usize); 10] = [
    ("f = ^(a[) -> a[]", Code::Parse, 1, 9),
    ("g = f(x[]=1", Code::Parse, 1, 12),
    ("x[:] = y[:]]", Code::Parse, 1, 12),
    ("h = ^(a[:], a[:]) -> a[:]", Code::DuplicateSlot, 1, 13),
    ("k = ^(f{}, f{}) -> f(x[]=1)[]", Code::DuplicateSlot, 1, 12),
    (
        "m = ^(a[:], b[:]=c[:], c[:]) -> b[:]",
        Code::ForwardRef,
        1,
        18,
    ),
    ("n = ^(x[:,:,:]) -> x[:, :]", Code::IndexCount, 1, 20),
    ("Y0[:] = [1, 2]\nz = Y0[:, 0]", Code::IndexCount, 2, 5),
    (
        "e = ^(u[:, :]) -> &es(u[:, :] @ a, b; u[0, :] @ b, c -> a)",
        Code::EsIndexCount,
        1,
        39,
    ),
    (
        "s = ^(y[:]) -> y[:][d y[+, :]]",
        Code::BroadcastInDerivative,
        1,
        25,
    ),
];

fn c7_parser_corpus() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../tcd-dsl/tests/corpus/listings.md");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = check_document(&text, Mode::Fenced);
    let errors: Vec<_> = doc
        .diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    ensure(errors.is_empty(), || {
        format!("corpus: {}", errors[0].render("listings.md"))
    })?;
    for (src, code, line, col) in NEGATIVES {
        let diags = check_source(src).diagnostics;
        let errs: Vec<_> = diags
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .collect();
        let hit = errs.len() == 1
            && errs[0].code == code
            && (errs[0].span.line, errs[0].span.col) == (line, col);
        ensure(hit, || {
            let got: Vec<_> = errs.iter().map(|d| d.render("<neg>")).collect();
            format!("{src:?}: expected {code:?} at {line}:{col}, got {got:?}")
        })?;
    }
    Ok(format!(
        "{} blocks clean, {} negatives exact",
        doc.blocks.len(),
        NEGATIVES.len()
    ))
}

fn bench(dir: &Path, name: &str, args: &[&str]) -> Result<Vec<BenchRow>, String> {
    let out = dir.join(name);
    let out = out.to_str().ok_or("temp path")?;
    let mut argv = vec!["hessode", "bench", "--out", out];
    argv.extend_from_slice(args);
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut so, &mut se);
    ensure(code == cli::exit::OK, || {
        format!("bench exited {code}: {}", String::from_utf8_lossy(&se))
    })?;
    csv::Reader::from_path(out)
        .map_err(|e| e.to_string())?
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}

fn c8_bench() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    // BP2 costs D⁴ per Hessian, so agreement is checked at the low end of
    // the range and DP alone is timed over all of it
    let rows = bench(
        dir.path(),
        "agree.csv",
        &["--dims", "40,60", "--repeats", "1"],
    )?;
    let agreement: Vec<f64> = rows.iter().filter_map(|r| r.agreement).collect();
    ensure(
        agreement.len() == 2 && agreement.iter().all(|&a| a < 1e-8),
        || format!("agreement {agreement:?}"),
    )?;
    let rows = bench(
        dir.path(),
        "dp.csv",
        &[
            "--dims",
            "40,60,80,100,120,150",
            "--methods",
            "dp",
            "--repeats",
            "3",
        ],
    )?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r.dim as f64, r.best_seconds?)))
        .collect();
    let slope = loglog_slope(&points);
    ensure((2.0..=4.0).contains(&slope), || {
        format!("dp slope {slope:.3}")
    })?;
    Ok(format!(
        "agreement {:.1e}/{:.1e}, dp slope {slope:.2}",
        agreement[0], agreement[1]
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 harmonic oscillator", c1_harmonic, 5),
        ("2 kepler orbit search", c2_kepler, 30),
        ("3 three-body orbit and deformation", c3_three_body, 300),
        ("4 dp/bp2/fd agreement", c4_method_agreement, 120),
        ("5 second-order term ablation", c5_ablation, 30),
        ("6 gradient oracle", c6_gradient_oracle, 60),
        ("7 notation corpus and negatives", c7_parser_corpus, 5),
        ("8 bench agreement and dp scaling", c8_bench, 600),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > Duration::from_secs(budget) => {
                Err(format!("{msg}; over budget of {budget} s"))
            }
            o => o,
        };
        match outcome {
            Ok(msg) => println!("PASS {name} ({:.2} s): {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {msg}", took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", 8 - failed, 8);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
