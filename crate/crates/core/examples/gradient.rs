//! Gradient of the Kepler orbit nonclosure by backpropagating the costate,
//! checked against finite differences.

use hessode::adjoint::backprop_gradient;
use hessode::fd_oracle::fd_grad_scalar;
use hessode::hessian_bp2::nc_value;
use hessode::linalg::max_abs_diff;
use hessode::loss::{L2Loss, TwoPointLoss};
use hessode::systems::{kepler, presets};
use hessode::{integrate, IntegratorConfig};

fn main() -> hessode::Result<()> {
    let cfg = IntegratorConfig::rk45(1e-12);
    let y0 = presets::KEPLER_Y0_INIT;
    let t = 2.0;

    let y1 = integrate(&kepler(), &y0, 0.0, t, &cfg)?.endpoint;
    let back = backprop_gradient(kepler(), &y1, &L2Loss.t1(&y0, &y1), t, 0.0, &cfg)?;
    let grad: Vec<f64> = L2Loss
        .t0(&y0, &y1)
        .iter()
        .zip(&back.sigma)
        .map(|(a, b)| a + b)
        .collect();

    let fd = fd_grad_scalar(|x| nc_value(kepler(), &L2Loss, x, t, &cfg), &y0, 1e-6)?;
    println!("backprop: {grad:.6?}");
    println!("fd:       {fd:.6?}");
    println!("max diff {:.2e}", max_abs_diff(&grad, &fd));
    // the backward pass also recovers the start state
    println!("start-state drift {:.2e}", max_abs_diff(&back.y, &y0));
    Ok(())
}
