//! The doubled costate system `(y, σ)` with `dy/dt = F(y)`, `dσ/dt = −σ·F′(y)`,
//! and gradient backpropagation through it.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::ode::{integrate, IntegratorConfig, OdeSystem};

/// Primal state and costate, stored flat as `concat(y, sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostateState {
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl CostateState {
    /// Splits a flat `2D` vector in half.
    pub fn split(flat: &[f64]) -> Self {
        let (y, sigma) = flat.split_at(flat.len() / 2);
        Self {
            y: y.to_vec(),
            sigma: sigma.to_vec(),
        }
    }

    pub fn join(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.y.len() * 2);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.sigma);
        v
    }
}

/// Costate system of an inner system, itself an [`OdeSystem`] of dimension `2D`
/// with analytic `jvp` and `vjp`, so it can be doubled again.
#[derive(Clone, Debug)]
pub struct Obp<S> {
    inner: S,
}

/// Wraps `system` into its costate system.
pub fn obp_system<S: OdeSystem>(system: S) -> Obp<S> {
    Obp { inner: system }
}

impl<S> Obp<S> {
    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: OdeSystem> OdeSystem for Obp<S> {
    fn dim(&self) -> usize {
        2 * self.inner.dim()
    }

    fn rate(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        let (y, sigma) = z.split_at(d);
        let (oy, os) = out.split_at_mut(d);
        self.inner.rate(t, y, oy);
        self.inner.vjp(y, sigma, os);
        os.iter_mut().for_each(|v| *v = -*v);
    }

    fn validate(&self, z: &[f64]) -> Result<()> {
        self.inner.validate(&z[..self.inner.dim()])
    }

    fn jvp(&self, z: &[f64], v: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        let (y, sigma) = z.split_at(d);
        let (vy, vs) = v.split_at(d);
        let (oy, os) = out.split_at_mut(d);
        self.inner.jvp(y, vy, oy);
        let mut tmp = vec![0.0; d];
        self.inner.vjp(y, vs, os);
        self.inner.sovjp(y, sigma, vy, &mut tmp);
        for (o, t) in os.iter_mut().zip(&tmp) {
            *o = -*o - t;
        }
    }

    fn vjp(&self, z: &[f64], s: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        let (y, sigma) = z.split_at(d);
        let (sy, ss) = s.split_at(d);
        let (oy, os) = out.split_at_mut(d);
        let mut tmp = vec![0.0; d];
        self.inner.vjp(y, sy, oy);
        self.inner.sovjp(y, sigma, ss, &mut tmp);
        for (o, t) in oy.iter_mut().zip(&tmp) {
            *o -= t;
        }
        self.inner.jvp(y, ss, os);
        os.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Integrates the costate system from `(y_end, sigma_end)` at `t_end` back to
/// `t_start`. The returned `sigma` is the gradient with respect to `y(t_start)`
/// of the objective whose gradient at `t_end` was `sigma_end`.
pub fn backprop_gradient<S: OdeSystem>(
    system: S,
    y_end: &[f64],
    sigma_end: &[f64],
    t_end: f64,
    t_start: f64,
    config: &IntegratorConfig,
) -> Result<CostateState> {
    check_dim(system.dim(), y_end.len())?;
    check_dim(system.dim(), sigma_end.len())?;
    let start = CostateState {
        y: y_end.to_vec(),
        sigma: sigma_end.to_vec(),
    };
    let cfg = IntegratorConfig {
        dense_samples: 0,
        ..*config
    };
    let tr = integrate(&obp_system(system), &start.join(), t_end, t_start, &cfg)?;
    Ok(CostateState::split(&tr.endpoint))
}
