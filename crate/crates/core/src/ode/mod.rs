//! Explicit Runge–Kutta integration of autonomous rate functions over flat
//! state vectors, forward or backward in time.

mod integrator;
mod system;

pub use integrator::{integrate, reverse_check, IntegratorConfig, Method, Trajectory};
pub use system::{fd_jvp, fd_sovjp, fd_vjp, FnSystem, OdeSystem};
