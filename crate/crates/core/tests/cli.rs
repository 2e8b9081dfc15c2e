use std::fs;
use std::path::{Path, PathBuf};

use hessode::cli::{exit, run, BenchRow, HessianOutput, OrbitOutput, RunManifest, SCHEMA};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hessode(args: &[&str]) -> Run {
    let mut argv = vec!["hessode"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read_json<T: serde::de::DeserializeOwned>(p: impl AsRef<Path>) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../tcd-dsl/tests/corpus/listings.md")
}

#[test]
fn harmonic_hessian_is_flat() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let r = hessode(&[
        "hessian", "--system", "ho3", "--method", "bp2", "--out", &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let h: HessianOutput = read_json(&out);
    assert_eq!(h.schema, SCHEMA);
    assert!(h.value < 1e-12);
    assert!(h.eigenvalues.iter().all(|l| l.abs() < 1e-8));
    assert_eq!(h.hessian.len(), 6);
    let m: RunManifest = read_json(RunManifest::path_for(Path::new(&out)));
    assert_eq!(m.subcommand, "hessian");
    assert_eq!(
        m.y0.as_deref(),
        Some(&[50.0, 10.0, 50.0, -20.0, 10.0, -0.1][..])
    );
}

#[test]
fn zero_time_gives_zero_hessian() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let r = hessode(&[
        "hessian",
        "--system",
        "kepler",
        "--t-final",
        "0",
        "--method",
        "dp",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let h: HessianOutput = read_json(&out);
    assert!(h.hessian.iter().flatten().all(|&v| v == 0.0));
    assert!(h.gradient.iter().all(|&v| v == 0.0));
}

#[test]
fn dp_and_bp2_outputs_agree() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "dp.json"), path(&dir, "bp2.json"));
    let y0 = "1,0,0,0,1,0";
    for (m, o) in [("dp", &a), ("bp2", &b)] {
        let r = hessode(&[
            "hessian", "--system", "kepler", "--y0", y0, "--method", m, "--out", o,
        ]);
        assert_eq!(r.code, exit::OK, "{}", r.stderr);
    }
    let (a, b): (HessianOutput, HessianOutput) = (read_json(a), read_json(b));
    let diff = a
        .hessian
        .iter()
        .flatten()
        .zip(b.hessian.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn vector_arguments_from_file_and_bad_lengths() {
    let dir = TempDir::new().unwrap();
    let vec_file = path(&dir, "y0.txt");
    fs::write(&vec_file, "1, 0, 0\n0, 1, 0\n").unwrap();
    let out = path(&dir, "h.json");
    let at = format!("@{vec_file}");
    let r = hessode(&[
        "hessian",
        "--system",
        "kepler",
        "--y0",
        &at,
        "--t-final",
        "1",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let h: HessianOutput = read_json(&out);
    assert_eq!(h.y0, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);

    let r = hessode(&[
        "hessian", "--system", "kepler", "--y0", "1,2", "--out", &out,
    ]);
    assert_eq!(r.code, exit::USAGE);
    assert!(r.stderr.contains("--y0"), "{}", r.stderr);
    let r = hessode(&["hessian", "--system", "randpoly", "--out", &out]);
    assert_eq!(r.code, exit::USAGE);
    let r = hessode(&["hessian", "--system", "ho4"]);
    assert_eq!(r.code, exit::USAGE);
}

#[test]
fn singular_start_is_a_solver_error() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let r = hessode(&[
        "hessian",
        "--system",
        "kepler",
        "--y0",
        "0,0,0,0,0,0",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::SOLVER, "{}", r.stderr);
}

#[test]
fn find_orbit_kepler() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "orbit.json");
    let r = hessode(&["find-orbit", "--system", "kepler", "--out", &out]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let o: OrbitOutput = read_json(&out);
    assert!(o.converged);
    assert!(o.orbit.nc_value < 1e-14);
    assert!(o.orbit.n_calls <= 30, "{}", o.orbit.n_calls);
    assert!((o.orbit.energy.unwrap() + 0.5).abs() < 1e-6);
    assert!(o.deformation.is_none());
}

#[test]
fn find_orbit_iteration_limit_exits_four_with_output() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "orbit.json");
    let r = hessode(&[
        "find-orbit",
        "--system",
        "kepler",
        "--max-iters",
        "2",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::NOT_CONVERGED, "{}", r.stderr);
    let o: OrbitOutput = read_json(&out);
    assert!(!o.converged);
    assert_eq!(o.orbit.iterations, 2);
}

#[test]
fn plot_three_body_tracks_and_markers() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "p.svg");
    let r = hessode(&[
        "plot",
        "--system",
        "p3bp",
        "--markers",
        "7",
        "--samples",
        "200",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(svg.matches("<circle").count(), 3 * 7);

    let r = hessode(&[
        "plot",
        "--system",
        "kepler",
        "--markers",
        "0",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let svg = fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert_eq!(svg.matches("<circle").count(), 0);

    let r = hessode(&[
        "plot",
        "--system",
        "kepler",
        "--projection",
        "0,7",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::USAGE);
}

fn bench_rows(out: &str) -> Vec<BenchRow> {
    csv::Reader::from_path(out)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn bench_checksums_do_not_depend_on_repeats() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    for (reps, out) in [("1", &a), ("2", &b)] {
        let r = hessode(&["bench", "--dims", "6,9", "--repeats", reps, "--out", out]);
        assert_eq!(r.code, exit::OK, "{}", r.stderr);
    }
    let (a, b) = (bench_rows(&a), bench_rows(&b));
    assert_eq!(a.len(), 6);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(
            (x.dim, &x.method, &x.checksum),
            (y.dim, &y.method, &y.checksum)
        );
    }
    let agreement: Vec<f64> = a.iter().filter_map(|r| r.agreement).collect();
    assert_eq!(agreement.len(), 2);
    assert!(agreement.iter().all(|&d| d < 1e-8), "{agreement:?}");
}

#[test]
fn tcd_check_corpus_passes() {
    let c = corpus();
    let r = hessode(&["tcd-check", c.to_str().unwrap()]);
    assert_eq!(r.code, exit::OK, "{}{}", r.stdout, r.stderr);
    assert!(!r.stdout.contains("error"), "{}", r.stdout);
}

#[test]
fn tcd_check_reports_position_and_groups_files() {
    let dir = TempDir::new().unwrap();
    let good = path(&dir, "good.tcd");
    let bad = path(&dir, "bad.tcd");
    let other = path(&dir, "other.tcd");
    fs::write(&good, "x[:] = [1, 2]\n").unwrap();
    fs::write(&bad, "ok = 1\nf = ^(a[) -> a[]\n").unwrap();
    fs::write(&other, "y[] = 3\n").unwrap();
    let json = path(&dir, "diag.json");
    let r = hessode(&["tcd-check", "--json", &json, &good, &bad, &other]);
    assert_eq!(r.code, exit::CHECK_FAILED);
    assert!(r.stdout.contains("bad.tcd:2:9"), "{}", r.stdout);
    assert!(!r.stdout.contains("good.tcd:"), "{}", r.stdout);
    let v: serde_json::Value = read_json(&json);
    assert_eq!(v["schema"], SCHEMA);
    assert!(Path::new(&RunManifest::path_for(Path::new(&json))).exists());

    let missing = path(&dir, "missing.tcd");
    let r = hessode(&["tcd-check", &good, &missing]);
    assert_eq!(r.code, exit::USAGE);
}

#[test]
fn rerun_from_manifest_is_bitwise_identical() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let r = hessode(&[
        "hessian",
        "--system",
        "randpoly",
        "--dim",
        "5",
        "--seed",
        "3",
        "--y0",
        "0.1,0.2,0.3,0.4,0.5",
        "--t-final",
        "0.4",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let first = fs::read(&out).unwrap();
    let m: RunManifest = read_json(RunManifest::path_for(Path::new(&out)));
    let args: Vec<&str> = m.argv.iter().skip(1).map(String::as_str).collect();
    assert_eq!(hessode(&args).code, exit::OK);
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn help_and_version_exit_zero() {
    let r = hessode(&["--help"]);
    assert_eq!(r.code, exit::OK);
    for sub in ["hessian", "find-orbit", "plot", "bench", "tcd-check"] {
        assert!(r.stdout.contains(sub), "{sub}");
    }
    assert_eq!(hessode(&["--version"]).code, exit::OK);
    assert_eq!(hessode(&["frobnicate"]).code, exit::USAGE);
}
