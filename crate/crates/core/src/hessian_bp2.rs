//! Orbit-nonclosure gradients and Hessians by backpropagating through the
//! costate integration itself, one Hessian row per seeded solve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::{backprop_gradient, obp_system};
use crate::error::{check_dim, Error, Result};
use crate::hessian::{HessianMethod, HessianResult};
use crate::linalg::{onehot, Matrix};
use crate::loss::TwoPointLoss;
use crate::ode::{integrate, IntegratorConfig, OdeSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcGradient {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub y_final: Vec<f64>,
}

fn endpoint_only(config: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig {
        dense_samples: 0,
        ..*config
    }
}

/// `loss(y0, y(t_final))` for the trajectory starting at `y0`.
pub fn nc_value<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    let y1 = integrate(&system, y0, 0.0, t_final, &endpoint_only(config))?.endpoint;
    Ok(loss.value(y0, &y1))
}

/// Value and gradient of `loss(y0, y(t_final))` with respect to `y0`.
pub fn nc_gradient<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<NcGradient> {
    let cfg = endpoint_only(config);
    let y1 = integrate(&system, y0, 0.0, t_final, &cfg)?.endpoint;
    let via_end = backprop_gradient(&system, &y1, &loss.t1(y0, &y1), t_final, 0.0, &cfg)?;
    let gradient = loss
        .t0(y0, &y1)
        .iter()
        .zip(&via_end.sigma)
        .map(|(a, b)| a + b)
        .collect();
    Ok(NcGradient {
        value: loss.value(y0, &y1),
        gradient,
        y_final: y1,
    })
}

/// Forward solve and first backprop, shared by every row.
struct Base {
    y1: Vec<f64>,
    sigma0: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
    t00: Matrix,
    t01: Matrix,
    t11: Matrix,
}

impl Base {
    fn new<S: OdeSystem, L: TwoPointLoss + ?Sized>(
        system: &S,
        loss: &L,
        y0: &[f64],
        t_final: f64,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        check_dim(system.dim(), y0.len())?;
        let y1 = integrate(system, y0, 0.0, t_final, cfg)?.endpoint;
        let s1 = loss.t1(y0, &y1);
        let sigma0 = backprop_gradient(system, &y1, &s1, t_final, 0.0, cfg)?.sigma;
        let gradient = loss
            .t0(y0, &y1)
            .iter()
            .zip(&sigma0)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            value: loss.value(y0, &y1),
            gradient,
            t00: loss.t00(y0, &y1),
            t01: loss.t01(y0, &y1),
            t11: loss.t11(y0, &y1),
            y1,
            sigma0,
        })
    }

    /// `uᵀ·H` for the seed `u`.
    fn seeded_row<S: OdeSystem>(
        &self,
        system: &S,
        y0: &[f64],
        t_final: f64,
        seed: &[f64],
        cfg: &IntegratorConfig,
    ) -> Result<Vec<f64>> {
        let d = y0.len();
        // Reverse the first backprop (which ran t_final → 0) by running its
        // costate system 0 → t_final. The primal half starts from the exact
        // y0 rather than its reconstruction.
        let mut z = Vec::with_capacity(4 * d);
        z.extend_from_slice(y0);
        z.extend_from_slice(&self.sigma0);
        z.extend(std::iter::repeat_n(0.0, d));
        z.extend_from_slice(seed);
        let twice = obp_system(obp_system(system));
        let end = integrate(&twice, &z, 0.0, t_final, cfg)?.endpoint;
        let z_y = &end[2 * d..3 * d];
        let z_s = &end[3 * d..];

        // sensitivity of uᵀ·gradient to y_final, at fixed y0
        let mut w = self.t01.vecmat(seed);
        let t11_zs = self.t11.vecmat(z_s);
        for ((wi, a), b) in w.iter_mut().zip(z_y).zip(&t11_zs) {
            *wi += a + b;
        }
        let through_flow = backprop_gradient(system, &self.y1, &w, t_final, 0.0, cfg)?.sigma;

        let mut row = self.t00.vecmat(seed);
        let direct = self.t01.matvec(z_s);
        for ((r, a), b) in row.iter_mut().zip(&direct).zip(&through_flow) {
            *r += a + b;
        }
        Ok(row)
    }
}

/// Row `j` of the Hessian of `loss(y0, y(t_final))` with respect to `y0`.
pub fn hessian_row<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    j: usize,
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let d = system.dim();
    if j >= d {
        return Err(Error::IndexOutOfRange { index: j, dim: d });
    }
    hessian_row_seeded(system, loss, y0, t_final, &onehot(j, d), config)
}

/// `uᵀ·H` for an arbitrary seed `u`; linear in `u`.
pub fn hessian_row_seeded<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    seed: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    check_dim(system.dim(), seed.len())?;
    let cfg = endpoint_only(config);
    let base = Base::new(&system, loss, y0, t_final, &cfg)?;
    base.seeded_row(&system, y0, t_final, seed, &cfg)
}

/// Full Hessian, rows computed in parallel.
pub fn bp2_hessian<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<HessianResult> {
    let cfg = endpoint_only(config);
    let base = Base::new(&system, loss, y0, t_final, &cfg)?;
    let d = y0.len();
    let rows = (0..d)
        .into_par_iter()
        .map(|j| base.seeded_row(&system, y0, t_final, &onehot(j, d), &cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(HessianResult::new(
        base.value,
        base.gradient.clone(),
        Matrix::from_rows(&rows),
        HessianMethod::Bp2,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::L2Loss;
    use crate::ode::FnSystem;

    #[test]
    fn zero_field_rows_vanish() {
        let sys = FnSystem::new(3, |_, _, out| out.fill(0.0));
        let y0 = [1.0, -2.0, 0.5];
        let h = bp2_hessian(&sys, &L2Loss, &y0, 2.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(h.hessian_raw.max_abs(), 0.0);
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn out_of_range_row_is_rejected() {
        let sys = FnSystem::new(2, |_, _, out| out.fill(0.0));
        let err = hessian_row(
            &sys,
            &L2Loss,
            &[0.0, 0.0],
            1.0,
            2,
            &IntegratorConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 2, dim: 2 }));
    }

    #[test]
    fn zero_time_gradient_vanishes() {
        let sys = FnSystem::new(2, |_, y, out| {
            out[0] = y[1];
            out[1] = -y[0];
        });
        let g = nc_gradient(
            &sys,
            &L2Loss,
            &[0.3, 0.4],
            0.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.gradient, vec![0.0, 0.0]);
        assert_eq!(g.y_final, vec![0.3, 0.4]);
    }
}
