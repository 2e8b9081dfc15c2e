//! DP and BP2 Hessian timings on random quadratic ODEs of growing size.

use std::time::Instant;

use hessode::cli::loglog_slope;
use hessode::hessian_bp2::bp2_hessian;
use hessode::hessian_dp::dp_hessian_endpoint;
use hessode::loss::{AtEndpoint, SquaredNorm};
use hessode::systems::random_poly_system;
use hessode::IntegratorConfig;

fn main() -> hessode::Result<()> {
    let cfg = IntegratorConfig::rk45(1e-10);
    let (mut dp_times, mut bp2_times) = (Vec::new(), Vec::new());
    for dim in [10, 15, 20, 30, 40] {
        let sys = random_poly_system(dim, 2, 0);
        let y0 = sys.random_start(0);

        let start = Instant::now();
        let dp = dp_hessian_endpoint(&sys, &SquaredNorm, &y0, 0.0, 0.2, &cfg, true)?;
        let t_dp = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let bp2 = bp2_hessian(&sys, &AtEndpoint(SquaredNorm), &y0, 0.2, &cfg)?;
        let t_bp2 = start.elapsed().as_secs_f64();

        println!(
            "D={dim:>3}  dp {t_dp:.3e} s  bp2 {t_bp2:.3e} s  |dp - bp2| {:.1e}",
            dp.hessian_raw.max_abs_diff(&bp2.hessian_raw)
        );
        dp_times.push((dim as f64, t_dp));
        bp2_times.push((dim as f64, t_bp2));
    }
    println!(
        "log-log slope: dp {:.2}, bp2 {:.2}",
        loglog_slope(&dp_times),
        loglog_slope(&bp2_times)
    );
    Ok(())
}
