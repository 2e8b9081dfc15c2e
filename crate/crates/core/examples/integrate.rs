//! Integrate a rotating linear system with RK45 and RK4 and compare both
//! against the closed-form solution.

use hessode::systems::linear;
use hessode::{integrate, IntegratorConfig, Matrix};

fn main() -> hessode::Result<()> {
    // y'' = -y in first-order form: the solution rotates with period 2π
    let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
    let sys = linear(a);
    let t: f64 = 10.0;
    let exact = [t.cos(), -t.sin()];

    for (name, cfg) in [
        ("rk45 tol 1e-10", IntegratorConfig::rk45(1e-10)),
        ("rk4 step 1e-2", IntegratorConfig::rk4(1e-2)),
    ] {
        let tr = integrate(&sys, &[1.0, 0.0], 0.0, t, &cfg)?;
        let err = (tr.endpoint[0] - exact[0])
            .abs()
            .max((tr.endpoint[1] - exact[1]).abs());
        println!(
            "{name:>16}: {} steps ({} rejected), error {err:.2e}",
            tr.n_accepted, tr.n_rejected
        );
    }
    Ok(())
}
