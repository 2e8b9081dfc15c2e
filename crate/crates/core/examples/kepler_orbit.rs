//! Closed Kepler orbit search and the spectrum of its nonclosure Hessian.

use hessode::orbit_lab::{find_orbit, FindOrbitOptions, OrbitProblem};
use hessode::systems::{kepler, presets};
use hessode::IntegratorConfig;

fn main() -> hessode::Result<()> {
    let problem = OrbitProblem::new(kepler(), presets::KEPLER_T, IntegratorConfig::rk45(1e-12));
    let report = find_orbit(
        &problem,
        &presets::KEPLER_Y0_INIT,
        &FindOrbitOptions::default(),
    )?;

    println!("y0      {:.6?}", report.y0);
    println!(
        "nc      {:.3e} after {} calls",
        report.nc_value, report.n_calls
    );
    println!("energy  {:.9}", kepler().energy(&report.y0)?);
    println!("flat    {}", report.n_flat);
    for (k, l) in report.eigenvalues.iter().enumerate() {
        println!("  λ{k} = {l:>12.4e}");
    }
    Ok(())
}
