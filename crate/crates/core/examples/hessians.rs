//! The three Hessian methods on one random quadratic system.

use std::time::Instant;

use hessode::fd_oracle::{fd_hessian_result, FdConfig};
use hessode::hessian_bp2::{bp2_hessian, nc_value};
use hessode::hessian_dp::{dp_hessian_two_point, dp_hessian_two_point_with};
use hessode::loss::L2Loss;
use hessode::systems::random_poly_system;
use hessode::IntegratorConfig;

fn main() -> hessode::Result<()> {
    let dim = 12;
    let sys = random_poly_system(dim, 2, 1);
    let y0 = sys.random_start(1);
    let cfg = IntegratorConfig::rk45(1e-10);
    let t = 0.2;

    let start = Instant::now();
    let dp = dp_hessian_two_point(&sys, &L2Loss, &y0, t, &cfg)?;
    println!("dp   {:>8.2?}", start.elapsed());
    let start = Instant::now();
    let bp2 = bp2_hessian(&sys, &L2Loss, &y0, t, &cfg)?;
    println!("bp2  {:>8.2?}", start.elapsed());
    let start = Instant::now();
    let fd = fd_hessian_result(
        |x| nc_value(&sys, &L2Loss, x, t, &cfg),
        &y0,
        &FdConfig::default(),
    )?;
    println!("fd   {:>8.2?}", start.elapsed());

    println!(
        "|dp - bp2| = {:.2e}",
        dp.hessian_raw.max_abs_diff(&bp2.hessian_raw)
    );
    println!(
        "|dp - fd|  = {:.2e}",
        dp.hessian_raw.max_abs_diff(&fd.hessian_raw)
    );

    // dropping σ·F″ leaves only the first-order part of the Hessian
    let ablated = dp_hessian_two_point_with(&sys, &L2Loss, &y0, t, &cfg, false)?;
    println!(
        "|ablated - fd| = {:.2e}",
        ablated.hessian_raw.max_abs_diff(&fd.hessian_raw)
    );
    Ok(())
}
