//! Figure-eight three-body orbit, then a deformation along its smallest
//! non-flat Hessian eigenvector into an orbit with distinct mass tracks.
//! Writes both orbits as SVG.

use hessode::cli::render_svg;
use hessode::orbit_lab::{
    deform_and_reconverge, find_orbit, min_track_separation, FindOrbitOptions, OrbitProblem,
};
use hessode::systems::{p3bp, presets, ThreeBody};
use hessode::IntegratorConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = OrbitProblem::new(p3bp(), presets::P3BP_T, IntegratorConfig::rk45(1e-12));
    let opts = FindOrbitOptions::default();
    let eight = find_orbit(&problem, &presets::P3BP_Y0_INIT, &opts)?;
    println!(
        "figure eight: nc {:.2e}, {} flat",
        eight.nc_value, eight.n_flat
    );
    let spectrum: Vec<String> = eight
        .eigenvalues
        .iter()
        .map(|l| format!("{l:.3e}"))
        .collect();
    println!("eigenvalues {}", spectrum.join(" "));

    let k = eight.n_flat;
    let deformed = deform_and_reconverge(&problem, &eight, k, -0.02, &opts)?;
    println!(
        "deformed along λ{k} = {:.3e}: nc {:.2e}",
        eight.eigenvalues[k], deformed.nc_value
    );

    for (name, report) in [("eight.svg", &eight), ("deformed.svg", &deformed)] {
        let tracks = ThreeBody::tracks(&problem.trajectory(&report.y0, 600)?.states);
        println!(
            "{name}: min track separation {:.3e}",
            min_track_separation(&tracks)
        );
        std::fs::write(name, render_svg(&tracks, &[]))?;
    }
    Ok(())
}
