//! Gradients and Hessians of scalar objectives backpropagated through
//! time-reversible ODEs.
//!
//! Three Hessian methods cross-check each other:
//!
//! * [`hessian_dp`] evolves state, gradient and Hessian jointly backwards;
//! * [`hessian_bp2`] backpropagates through the gradient backpropagation,
//!   one Hessian row per solve;
//! * [`fd_oracle`] differences the objective directly.
//!
//! [`orbit_lab`] applies them to closed-orbit search for the systems in
//! [`systems`].

pub mod adjoint;
pub mod cli;
pub mod error;
pub mod fd_oracle;
pub mod hessian;
pub mod hessian_bp2;
pub mod hessian_dp;
pub mod linalg;
pub mod loss;
pub mod ode;
pub mod orbit_lab;
pub mod systems;

pub use error::{Error, Result};
pub use hessian::{HessianMethod, HessianResult};
pub use linalg::Matrix;
pub use ode::{integrate, IntegratorConfig, Method, OdeSystem, Trajectory};
