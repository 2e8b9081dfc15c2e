//! Guarding an analytic gradient with a finite-difference check. The second
//! gradient has a sign error in one component and is rejected.

use hessode::fd_oracle::{verified_grad, FdConfig};
use hessode::hessian_bp2::{nc_gradient, nc_value};
use hessode::loss::L2Loss;
use hessode::systems::{p3bp, presets};
use hessode::IntegratorConfig;

fn main() {
    let cfg = IntegratorConfig::rk45(1e-10);
    let t = 1.0;
    let f = |x: &[f64]| nc_value(p3bp(), &L2Loss, x, t, &cfg);
    let good = |x: &[f64]| nc_gradient(p3bp(), &L2Loss, x, t, &cfg).map(|g| g.gradient);
    let bad = |x: &[f64]| {
        let mut g = good(x)?;
        g[3] = -g[3];
        Ok(g)
    };

    let y0 = presets::P3BP_Y0_INIT;
    let checked_good = verified_grad(f, good, FdConfig::default());
    let checked_bad = verified_grad(f, bad, FdConfig::default());
    for (name, result) in [("good", checked_good(&y0)), ("bad", checked_bad(&y0))] {
        match result {
            Ok(g) => println!("{name}: accepted {g:.4?}"),
            Err(e) => println!("{name}: rejected, {e}"),
        }
    }
}
