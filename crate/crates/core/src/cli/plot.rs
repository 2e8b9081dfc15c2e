use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use super::manifest::RunManifest;
use super::{exit, write_file, CliError, CliResult, SystemArgs};
use crate::ode::{integrate, IntegratorConfig};
use crate::systems::{SystemTag, ThreeBody};

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

#[derive(Debug, Args)]
pub(super) struct PlotArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Start state: comma list or @file. Defaults to the system's preset.
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Two position coordinates to draw, e.g. `0,1`.
    #[arg(long, default_value = "0,1")]
    projection: String,
    /// Round markers per track at uniformly spaced times.
    #[arg(long, default_value_t = 12)]
    markers: usize,
    /// Polyline vertices per track.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "orbit.svg")]
    out: PathBuf,
}

/// Position of each mass over `states`: `tracks[mass][sample][coord]`.
pub fn position_tracks(tag: SystemTag, states: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    match tag {
        SystemTag::Ho3 | SystemTag::Kepler => {
            vec![states.iter().map(|s| s[..3].to_vec()).collect()]
        }
        SystemTag::P3bp => ThreeBody::tracks(states)
            .into_iter()
            .map(|t| t.into_iter().map(|p| p.to_vec()).collect())
            .collect(),
        SystemTag::Randpoly => vec![states.to_vec()],
    }
}

fn parse_projection(arg: &str, coords: usize) -> CliResult<(usize, usize)> {
    let bad = || {
        CliError::Usage(format!(
            "--projection '{arg}': expected two distinct coordinate indices below {coords}"
        ))
    };
    let parts: Vec<usize> = arg
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    match parts[..] {
        [a, b] if a != b && a < coords && b < coords => Ok((a, b)),
        _ => Err(bad()),
    }
}

/// An SVG with one polyline per track and filled circles at `markers`.
/// The y axis points up; the view box fits all points with a 5% margin.
pub fn render_svg(tracks: &[Vec<[f64; 2]>], markers: &[Vec<[f64; 2]>]) -> String {
    let pts = || tracks.iter().chain(markers).flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in pts() {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(-p[1]);
        y1 = y1.max(-p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let w = if x1 > x0 { x1 - x0 } else { 1.0 };
    let h = if y1 > y0 { y1 - y0 } else { 1.0 };
    let (mx, my) = (0.05 * w, 0.05 * h);
    let (vw, vh) = (w + 2.0 * mx, h + 2.0 * my);
    let radius = 0.008 * vw.max(vh);
    let width = 600.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{width}" height="{:.0}">"#,
        x0 - mx,
        y0 - my,
        vw,
        vh,
        width * vh / vw
    );
    for (i, track) in tracks.iter().enumerate() {
        let points: Vec<String> = track
            .iter()
            .map(|p| format!("{},{}", p[0], -p[1]))
            .collect();
        let _ = writeln!(
            s,
            r#"  <polyline fill="none" stroke="{}" stroke-width="1.5" vector-effect="non-scaling-stroke" points="{}"/>"#,
            COLORS[i % COLORS.len()],
            points.join(" ")
        );
    }
    for (i, ms) in markers.iter().enumerate() {
        for p in ms {
            let _ = writeln!(
                s,
                r#"  <circle cx="{}" cy="{}" r="{radius}" fill="{}"/>"#,
                p[0],
                -p[1],
                COLORS[i % COLORS.len()]
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn project(tracks: &[Vec<Vec<f64>>], (a, b): (usize, usize)) -> Vec<Vec<[f64; 2]>> {
    tracks
        .iter()
        .map(|t| t.iter().map(|p| [p[a], p[b]]).collect())
        .collect()
}

pub(super) fn run(args: PlotArgs, argv: &[String], out: &mut dyn Write) -> CliResult<i32> {
    let tag = args.system.system;
    let y0 = args.system.y0(args.y0.as_deref(), "y0")?;
    let t_final = args.system.t_final(args.t_final)?;
    let coords = position_tracks(tag, std::slice::from_ref(&y0))[0][0].len();
    let projection = parse_projection(&args.projection, coords)?;
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let config = IntegratorConfig::rk45(args.tol);
    config.validate()?;

    let mut manifest = RunManifest::new("plot", argv);
    manifest.system = Some(tag);
    manifest.dim = Some(y0.len());
    manifest.y0 = Some(y0.clone());
    manifest.t_final = Some(t_final);
    manifest.integrator = Some(config);
    manifest.seed = (tag == SystemTag::Randpoly).then_some(args.system.seed);

    let system = tag.build(y0.len(), args.system.seed);
    let (line, marks) = manifest.time("integrate", || -> CliResult<_> {
        let line = integrate(
            &system,
            &y0,
            0.0,
            t_final,
            &config.with_dense_samples(args.samples),
        )?;
        // N markers at k·T/N, k < N: sample N+1 points and drop the last
        let marks = if args.markers > 0 {
            let tr = integrate(
                &system,
                &y0,
                0.0,
                t_final,
                &config.with_dense_samples(args.markers + 1),
            )?;
            tr.states[..args.markers.min(tr.states.len())].to_vec()
        } else {
            Vec::new()
        };
        Ok((line, marks))
    })?;
    let tracks = project(&position_tracks(tag, &line.states), projection);
    let markers = if marks.is_empty() {
        Vec::new()
    } else {
        project(&position_tracks(tag, &marks), projection)
    };
    write_file(&args.out, &render_svg(&tracks, &markers))?;
    manifest.write_beside(&args.out)?;
    let _ = writeln!(out, "{} track(s) -> {}", tracks.len(), args.out.display());
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_validation() {
        assert_eq!(parse_projection("0,2", 3).unwrap(), (0, 2));
        for bad in ["0,0", "0,3", "1", "a,b", "0,1,2"] {
            assert!(parse_projection(bad, 3).is_err(), "{bad}");
        }
    }

    #[test]
    fn svg_counts_and_margin() {
        let tracks = vec![vec![[0.0, 0.0], [10.0, 5.0]], vec![[1.0, 1.0], [2.0, 2.0]]];
        let markers = vec![vec![[0.0, 0.0]], vec![[1.0, 1.0], [2.0, 2.0]]];
        let svg = render_svg(&tracks, &markers);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
        // x spans [0, 10], y spans [-5, 0] after flipping
        assert!(svg.contains(r#"viewBox="-0.5 -5.25 11 5.5""#), "{svg}");
    }
}
