//! Hessians by joint backward evolution of `(y, σ, h)`:
//!
//! ```text
//! dy/dt = F
//! dσ/dt = −σ·F′
//! dh/dt = −h·F′ − F′ᵀ·h − σ_m F_{m,ij}
//! ```
//!
//! For objectives that also depend on the start state, an extra block
//! `dg/dt = −g·F′` carries the mixed start/end term.

use crate::error::{check_dim, Result};
use crate::hessian::{HessianMethod, HessianResult};
use crate::linalg::{transpose_square_in_place, Matrix};
use crate::loss::{EndpointLoss, TwoPointLoss};
use crate::ode::{integrate, IntegratorConfig, OdeSystem};

/// The `(y, σ, h[, g])` system, flattened row-major into one state vector.
#[derive(Clone, Debug)]
pub struct DpSystem<S> {
    inner: S,
    include_sigma_f_term: bool,
    cross_term: bool,
}

/// `include_sigma_f_term = false` drops `σ_m F_{m,ij}`, which is only correct
/// when backpropagation starts at a critical point or `F` is linear.
pub fn dp_system<S: OdeSystem>(system: S, include_sigma_f_term: bool) -> DpSystem<S> {
    DpSystem {
        inner: system,
        include_sigma_f_term,
        cross_term: false,
    }
}

impl<S> DpSystem<S> {
    /// Adds the `g` block for two-endpoint objectives.
    pub fn with_cross_term(mut self) -> Self {
        self.cross_term = true;
        self
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: OdeSystem> DpSystem<S> {
    /// Flattens `(y, σ, h[, g])`.
    pub fn pack(
        &self,
        y: &[f64],
        sigma: &[f64],
        h: &Matrix,
        g: Option<&Matrix>,
    ) -> Result<Vec<f64>> {
        let d = self.inner.dim();
        check_dim(d, y.len())?;
        check_dim(d, sigma.len())?;
        check_dim(d * d, h.as_slice().len())?;
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(y);
        z.extend_from_slice(sigma);
        z.extend_from_slice(h.as_slice());
        if self.cross_term {
            let g = g
                .map(|g| g.as_slice().to_vec())
                .unwrap_or_else(|| vec![0.0; d * d]);
            check_dim(d * d, g.len())?;
            z.extend_from_slice(&g);
        }
        Ok(z)
    }

    /// Splits a flat state into `(y, σ, h, g)`.
    pub fn unpack(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>, Matrix, Option<Matrix>) {
        let d = self.inner.dim();
        let y = z[..d].to_vec();
        let sigma = z[d..2 * d].to_vec();
        let h = Matrix::from_row_major(d, d, z[2 * d..2 * d + d * d].to_vec());
        let g = self
            .cross_term
            .then(|| Matrix::from_row_major(d, d, z[2 * d + d * d..].to_vec()));
        (y, sigma, h, g)
    }
}

impl<S: OdeSystem> OdeSystem for DpSystem<S> {
    fn dim(&self) -> usize {
        let d = self.inner.dim();
        2 * d + d * d * if self.cross_term { 2 } else { 1 }
    }

    fn rate(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        let dd = d * d;
        let (y, rest) = z.split_at(d);
        let (sigma, rest) = rest.split_at(d);
        let (h, g) = rest.split_at(dd);
        let (oy, orest) = out.split_at_mut(d);
        let (os, orest) = orest.split_at_mut(d);
        let (oh, og) = orest.split_at_mut(dd);

        self.inner.rate(t, y, oy);
        self.inner.vjp(y, sigma, os);
        os.iter_mut().for_each(|v| *v = -*v);

        // (h·F′)_{ik} row by row, then (hᵀ·F′)ᵀ = F′ᵀ·h
        self.inner.vjp_rows(y, h, oh);
        let mut ht = h.to_vec();
        transpose_square_in_place(&mut ht, d);
        let mut b = vec![0.0; dd];
        self.inner.vjp_rows(y, &ht, &mut b);
        transpose_square_in_place(&mut b, d);
        for (o, v) in oh.iter_mut().zip(&b) {
            *o = -*o - v;
        }
        if self.include_sigma_f_term {
            self.inner.sigma_hessian(y, sigma, &mut b);
            for (o, v) in oh.iter_mut().zip(&b) {
                *o -= v;
            }
        }

        if self.cross_term {
            self.inner.vjp_rows(y, g, og);
            og.iter_mut().for_each(|v| *v = -*v);
        }
    }

    fn validate(&self, z: &[f64]) -> Result<()> {
        self.inner.validate(&z[..self.inner.dim()])
    }
}

fn endpoint_only(config: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig {
        dense_samples: 0,
        ..*config
    }
}

/// Gradient and Hessian with respect to `y(t0)` of `loss(y(t1))`.
pub fn dp_hessian_endpoint<S: OdeSystem, L: EndpointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    include_sigma_f_term: bool,
) -> Result<HessianResult> {
    check_dim(system.dim(), y0.len())?;
    let cfg = endpoint_only(config);
    let y1 = integrate(&system, y0, t0, t1, &cfg)?.endpoint;
    let dp = dp_system(system, include_sigma_f_term);
    let start = dp.pack(&y1, &loss.grad(&y1), &loss.hess(&y1), None)?;
    let back = integrate(&dp, &start, t1, t0, &cfg)?;
    let (_, sigma, h, _) = dp.unpack(&back.endpoint);
    Ok(HessianResult::new(
        loss.value(&y1),
        sigma,
        h,
        HessianMethod::Dp,
    ))
}

/// Gradient and Hessian with respect to `y0` of `loss(y0, y(t_final))`, the
/// trajectory starting at `y0` at time 0.
pub fn dp_hessian_two_point<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<HessianResult> {
    dp_hessian_two_point_with(system, loss, y0, t_final, config, true)
}

/// [`dp_hessian_two_point`] with the `σ·F″` term switchable.
pub fn dp_hessian_two_point_with<S: OdeSystem, L: TwoPointLoss + ?Sized>(
    system: S,
    loss: &L,
    y0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
    include_sigma_f_term: bool,
) -> Result<HessianResult> {
    check_dim(system.dim(), y0.len())?;
    let cfg = endpoint_only(config);
    let y1 = integrate(&system, y0, 0.0, t_final, &cfg)?.endpoint;
    let dp = dp_system(system, include_sigma_f_term).with_cross_term();
    let start = dp.pack(
        &y1,
        &loss.t1(y0, &y1),
        &loss.t11(y0, &y1),
        Some(&loss.t01(y0, &y1)),
    )?;
    let back = integrate(&dp, &start, t_final, 0.0, &cfg)?;
    let (_, sigma, h, g) = dp.unpack(&back.endpoint);
    let g = g.expect("cross term enabled");

    let gradient = loss
        .t0(y0, &y1)
        .iter()
        .zip(&sigma)
        .map(|(a, b)| a + b)
        .collect();
    let hessian = loss.t00(y0, &y1).add(&g).add(&g.transpose()).add(&h);
    Ok(HessianResult::new(
        loss.value(y0, &y1),
        gradient,
        hessian,
        HessianMethod::Dp,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{L2Loss, SquaredNorm};
    use crate::ode::FnSystem;

    fn decay() -> FnSystem {
        FnSystem::new(1, |_, y, out| out[0] = -y[0])
            .with_jvp(|_, v, out| out[0] = -v[0])
            .with_vjp(|_, s, out| out[0] = -s[0])
            .with_sovjp(|_, _, _, out| out[0] = 0.0)
    }

    #[test]
    fn decay_hessian_is_two_exp_minus_two() {
        let r = dp_hessian_endpoint(
            decay(),
            &SquaredNorm,
            &[1.0],
            0.0,
            1.0,
            &IntegratorConfig::rk45(1e-12),
            true,
        )
        .unwrap();
        let expected = 2.0 * (-2.0f64).exp();
        assert!((r.hessian_raw[(0, 0)] - expected).abs() < 1e-9);
        assert!((r.gradient[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_field_passes_loss_through() {
        let sys = FnSystem::new(2, |_, _, out| out.fill(0.0));
        let y0 = [1.5, -0.5];
        let r = dp_hessian_endpoint(
            &sys,
            &SquaredNorm,
            &y0,
            0.0,
            3.0,
            &IntegratorConfig::default(),
            true,
        )
        .unwrap();
        assert_eq!(r.gradient, vec![3.0, -1.0]);
        assert_eq!(r.hessian_raw, Matrix::scaled_identity(2, 2.0));
    }

    #[test]
    fn zero_time_l2_hessian_vanishes() {
        let r = dp_hessian_two_point(decay(), &L2Loss, &[0.3], 0.0, &IntegratorConfig::default())
            .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.gradient, vec![0.0]);
        assert_eq!(r.hessian_raw[(0, 0)], 0.0);
    }
}
