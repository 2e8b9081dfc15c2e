//! Central finite differences: gradients, Hessians, and a guard that checks an
//! analytic gradient against them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hessian::{HessianMethod, HessianResult};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub eps_grad: f64,
    pub eps_hess: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            eps_grad: 1e-7,
            eps_hess: 1e-5,
            rtol: 0.1,
            atol: 1e-3,
        }
    }
}

fn probe(x0: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    x[i] += delta;
    x
}

/// The distance between the two probes as actually represented, which
/// differs from `2ε` by the rounding of `x0[i] ± ε`.
fn probe_width(x0: &[f64], i: usize, eps: f64) -> f64 {
    (x0[i] + eps) - (x0[i] - eps)
}

fn finite(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFiniteOutput)
    }
}

/// Jacobian of a vector-valued `f` at `x0`: row `k` holds `∂f_k/∂x`.
///
/// Probes run in parallel over coordinates.
pub fn fd_grad<F>(f: F, x0: &[f64], eps: f64) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let columns = (0..x0.len())
        .into_par_iter()
        .map(|i| {
            let plus = finite(f(&probe(x0, i, eps))?)?;
            let minus = finite(f(&probe(x0, i, -eps))?)?;
            if plus.len() != minus.len() {
                return Err(Error::DimensionMismatch {
                    expected: plus.len(),
                    got: minus.len(),
                });
            }
            let width = probe_width(x0, i, eps);
            Ok(plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / width)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let m = columns.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(m, x0.len(), |k, i| columns[i][k]))
}

/// Gradient of a scalar `f` at `x0`.
pub fn fd_grad_scalar<F>(f: F, x0: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    Ok(fd_grad(|x| f(x).map(|v| vec![v]), x0, eps)?.into_vec())
}

/// Hessian of a scalar `f` as the finite-difference gradient of its
/// finite-difference gradient, both with step `eps`.
pub fn fd_hessian<F>(f: F, x0: &[f64], eps: f64) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let d = x0.len();
    // entry (i, k) = ∂/∂x_k of the inner gradient's component i
    let jac = fd_grad(|x| fd_grad_scalar(&f, x, eps), x0, eps)?;
    debug_assert_eq!((jac.rows(), jac.cols()), (d, d));
    Ok(jac)
}

/// [`fd_hessian`] packaged with the value and a finite-difference gradient.
pub fn fd_hessian_result<F>(f: F, x0: &[f64], cfg: &FdConfig) -> Result<HessianResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let value = f(x0)?;
    let gradient = fd_grad_scalar(&f, x0, cfg.eps_grad)?;
    let hessian = fd_hessian(&f, x0, cfg.eps_hess)?;
    Ok(HessianResult::new(
        value,
        gradient,
        hessian,
        HessianMethod::Fd,
    ))
}

/// Wraps `analytic_grad` so every call is checked against a finite-difference
/// gradient of `f`. Component `i` fails when it deviates by more than
/// `atol + rtol·|reference_i|`; the worst offender is reported.
pub fn verified_grad<F, G>(
    f: F,
    analytic_grad: G,
    cfg: FdConfig,
) -> impl Fn(&[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    move |x| {
        let analytic = analytic_grad(x)?;
        let reference = fd_grad_scalar(&f, x, cfg.eps_grad)?;
        if analytic.len() != reference.len() {
            return Err(Error::DimensionMismatch {
                expected: reference.len(),
                got: analytic.len(),
            });
        }
        let worst = analytic
            .iter()
            .zip(&reference)
            .enumerate()
            .map(|(i, (a, r))| (i, (a - r).abs() - (cfg.atol + cfg.rtol * r.abs()), *a, *r))
            .filter(|&(_, excess, a, _)| excess > 0.0 || !a.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((index, _, analytic, reference)) => Err(Error::GradientMismatch {
                index,
                analytic,
                reference,
            }),
            None => Ok(analytic),
        }
    }
}
