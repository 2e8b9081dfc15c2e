//! SVG of the Kepler search start and the closed orbit it converges to,
//! with markers at equal time steps.

use hessode::cli::render_svg;
use hessode::orbit_lab::{find_orbit, FindOrbitOptions, OrbitProblem};
use hessode::systems::{kepler, presets};
use hessode::IntegratorConfig;

fn xy(states: &[Vec<f64>]) -> Vec<[f64; 2]> {
    states.iter().map(|s| [s[0], s[1]]).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = OrbitProblem::new(kepler(), presets::KEPLER_T, IntegratorConfig::rk45(1e-12));
    let report = find_orbit(
        &problem,
        &presets::KEPLER_Y0_INIT,
        &FindOrbitOptions::default(),
    )?;

    let before = problem.trajectory(&presets::KEPLER_Y0_INIT, 500)?;
    let after = problem.trajectory(&report.y0, 500)?;
    let markers = problem.trajectory(&report.y0, 13)?;
    let svg = render_svg(
        &[xy(&before.states), xy(&after.states)],
        &[xy(&markers.states)],
    );
    std::fs::write("kepler.svg", svg)?;
    println!("wrote kepler.svg (nc {:.2e})", report.nc_value);
    Ok(())
}
