use std::sync::Arc;

use crate::error::Result;
use crate::linalg::{dot, max_abs};

/// A rate function `dy/dt = F(t, y)` together with the first- and
/// second-derivative contractions the backpropagation machinery consumes.
///
/// Only [`dim`](OdeSystem::dim) and [`rate`](OdeSystem::rate) are required.
/// The derivative contractions default to finite-difference fallbacks, so every
/// system exposes all of them. The fallbacks evaluate the rate at `t = 0`:
/// systems are assumed autonomous wherever derivatives are taken.
pub trait OdeSystem: Send + Sync {
    /// State-space dimension `D`.
    fn dim(&self) -> usize;

    /// Writes `F(t, y)` into `out`.
    fn rate(&self, t: f64, y: &[f64], out: &mut [f64]);

    /// Rejects states where the rate function is undefined (e.g. collisions).
    fn validate(&self, _y: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Jacobian-vector product `F_{i,k}(y) v_k`.
    fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        fd_jvp(self, y, v, out);
    }

    /// Vector-Jacobian product `s_i F_{i,k}(y)`.
    ///
    /// The fallback assembles the Jacobian column by column from `jvp`.
    fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for k in 0..d {
            e[k] = 1.0;
            self.jvp(y, &e, &mut col);
            e[k] = 0.0;
            out[k] = dot(s, &col);
        }
    }

    /// Second-order contraction `a_m b_i F_{m,ij}(y)`, indexed by `j`.
    fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        fd_sovjp(self, y, a, b, out);
    }

    /// Batched `vjp`: `rows` holds `k` co-vectors row-major (`k × D`), and row
    /// `r` of `out` receives `rows[r]·F'(y)`.
    fn vjp_rows(&self, y: &[f64], rows: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (s, o) in rows.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
            self.vjp(y, s, o);
        }
    }

    /// `σ_m F_{m,ij}(y)` as a row-major `D × D` matrix.
    fn sigma_hessian(&self, y: &[f64], sigma: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let mut e = vec![0.0; d];
        for i in 0..d {
            e[i] = 1.0;
            self.sovjp(y, sigma, &e, &mut out[i * d..(i + 1) * d]);
            e[i] = 0.0;
        }
    }
}

/// Central-difference `jvp` with `ε = 1e-7·max(1,|y|∞)/max(1,|v|∞)`.
pub fn fd_jvp<S: OdeSystem + ?Sized>(sys: &S, y: &[f64], v: &[f64], out: &mut [f64]) {
    let vmax = max_abs(v);
    if vmax == 0.0 {
        out.fill(0.0);
        return;
    }
    let eps = 1e-7 * max_abs(y).max(1.0) / vmax.max(1.0);
    let d = sys.dim();
    let mut yp: Vec<f64> = y.iter().zip(v).map(|(a, b)| a + eps * b).collect();
    let mut fp = vec![0.0; d];
    sys.rate(0.0, &yp, &mut fp);
    for ((p, a), b) in yp.iter_mut().zip(y).zip(v) {
        *p = a - eps * b;
    }
    sys.rate(0.0, &yp, out);
    for (o, p) in out.iter_mut().zip(&fp) {
        *o = (p - *o) / (2.0 * eps);
    }
}

/// `vjp` from a finite-difference Jacobian assembled with [`fd_jvp`], one
/// column per coordinate. Independent of any analytic derivative the system has.
pub fn fd_vjp<S: OdeSystem + ?Sized>(sys: &S, y: &[f64], s: &[f64], out: &mut [f64]) {
    let d = sys.dim();
    let mut e = vec![0.0; d];
    let mut col = vec![0.0; d];
    for k in 0..d {
        e[k] = 1.0;
        fd_jvp(sys, y, &e, &mut col);
        e[k] = 0.0;
        out[k] = dot(s, &col);
    }
}

/// `sovjp` as the central difference of the system's `vjp` along `b`,
/// `ε = 1e-5·max(1,|y|∞)/max(1,|b|∞)`.
pub fn fd_sovjp<S: OdeSystem + ?Sized>(sys: &S, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
    let bmax = max_abs(b);
    if bmax == 0.0 {
        out.fill(0.0);
        return;
    }
    let eps = 1e-5 * max_abs(y).max(1.0) / bmax.max(1.0);
    let d = sys.dim();
    let mut yp: Vec<f64> = y.iter().zip(b).map(|(p, q)| p + eps * q).collect();
    let mut gp = vec![0.0; d];
    sys.vjp(&yp, a, &mut gp);
    for ((p, q), r) in yp.iter_mut().zip(y).zip(b) {
        *p = q - eps * r;
    }
    sys.vjp(&yp, a, out);
    for (o, p) in out.iter_mut().zip(&gp) {
        *o = (p - *o) / (2.0 * eps);
    }
}

macro_rules! forward_ode_system {
    ($($ty:ty),*) => {$(
        impl<S: OdeSystem + ?Sized> OdeSystem for $ty {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn rate(&self, t: f64, y: &[f64], out: &mut [f64]) {
                (**self).rate(t, y, out)
            }
            fn validate(&self, y: &[f64]) -> Result<()> {
                (**self).validate(y)
            }
            fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
                (**self).jvp(y, v, out)
            }
            fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
                (**self).vjp(y, s, out)
            }
            fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
                (**self).sovjp(y, a, b, out)
            }
            fn vjp_rows(&self, y: &[f64], rows: &[f64], out: &mut [f64]) {
                (**self).vjp_rows(y, rows, out)
            }
            fn sigma_hessian(&self, y: &[f64], sigma: &[f64], out: &mut [f64]) {
                (**self).sigma_hessian(y, sigma, out)
            }
        }
    )*};
}

forward_ode_system!(&S, Box<S>, Arc<S>);

type RateFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type ContractFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type SecondOrderFn = dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;

/// An [`OdeSystem`] assembled from closures. Missing derivative closures fall
/// back to finite differences.
pub struct FnSystem {
    dim: usize,
    rate: Box<RateFn>,
    jvp: Option<Box<ContractFn>>,
    vjp: Option<Box<ContractFn>>,
    sovjp: Option<Box<SecondOrderFn>>,
}

impl FnSystem {
    pub fn new(dim: usize, rate: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            rate: Box::new(rate),
            jvp: None,
            vjp: None,
            sovjp: None,
        }
    }

    pub fn with_jvp(
        mut self,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.jvp = Some(Box::new(f));
        self
    }

    pub fn with_vjp(
        mut self,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.vjp = Some(Box::new(f));
        self
    }

    pub fn with_sovjp(
        mut self,
        f: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.sovjp = Some(Box::new(f));
        self
    }
}

impl std::fmt::Debug for FnSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnSystem")
            .field("dim", &self.dim)
            .field("jvp", &self.jvp.is_some())
            .field("vjp", &self.vjp.is_some())
            .field("sovjp", &self.sovjp.is_some())
            .finish()
    }
}

impl OdeSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rate(&self, t: f64, y: &[f64], out: &mut [f64]) {
        (self.rate)(t, y, out)
    }

    fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.jvp {
            Some(f) => f(y, v, out),
            None => fd_jvp(self, y, v, out),
        }
    }

    fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
        match &self.vjp {
            Some(f) => f(y, s, out),
            None => {
                let d = self.dim;
                let mut e = vec![0.0; d];
                let mut col = vec![0.0; d];
                for k in 0..d {
                    e[k] = 1.0;
                    self.jvp(y, &e, &mut col);
                    e[k] = 0.0;
                    out[k] = dot(s, &col);
                }
            }
        }
    }

    fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        match &self.sovjp {
            Some(f) => f(y, a, b, out),
            None => fd_sovjp(self, y, a, b, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    // F(y) = (y0·y1, y1², sin y0)
    fn rate(y: &[f64], out: &mut [f64]) {
        out[0] = y[0] * y[1];
        out[1] = y[1] * y[1];
        out[2] = y[0].sin();
    }

    fn jacobian(y: &[f64]) -> [[f64; 3]; 3] {
        [
            [y[1], y[0], 0.0],
            [0.0, 2.0 * y[1], 0.0],
            [y[0].cos(), 0.0, 0.0],
        ]
    }

    fn toy() -> FnSystem {
        FnSystem::new(3, |_, y, out| rate(y, out))
    }

    /// Same field with an analytic vjp, so only sovjp is differenced.
    fn toy_with_vjp() -> FnSystem {
        FnSystem::new(3, |_, y, out| rate(y, out)).with_vjp(|y, s, out| {
            let j = jacobian(y);
            for k in 0..3 {
                out[k] = (0..3).map(|i| s[i] * j[i][k]).sum();
            }
        })
    }

    const Y: [f64; 3] = [0.3, -1.2, 0.7];
    const A: [f64; 3] = [0.5, -1.0, 2.0];
    const B: [f64; 3] = [1.0, 0.25, 3.0];

    // F0,01 = F0,10 = 1; F1,11 = 2; F2,00 = −sin y0
    fn expected_sovjp() -> [f64; 3] {
        [
            A[0] * B[1] + A[2] * B[0] * -(Y[0].sin()),
            A[0] * B[0] + A[1] * B[1] * 2.0,
            0.0,
        ]
    }

    #[test]
    fn first_order_fallbacks_match_hand_derivatives() {
        let sys = toy();
        let j = jacobian(&Y);
        let mut out = [0.0; 3];
        sys.jvp(&Y, &B, &mut out);
        let expected: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|k| j[i][k] * B[k]).sum())
            .collect();
        assert!(max_abs_diff(&out, &expected) < 1e-7);

        sys.vjp(&Y, &B, &mut out);
        let expected: Vec<f64> = (0..3)
            .map(|k| (0..3).map(|i| B[i] * j[i][k]).sum())
            .collect();
        assert!(max_abs_diff(&out, &expected) < 1e-7);
        fd_vjp(&sys, &Y, &B, &mut out);
        assert!(max_abs_diff(&out, &expected) < 1e-7);
    }

    #[test]
    fn sovjp_fallback_matches_hand_derivatives() {
        let mut out = [0.0; 3];
        toy_with_vjp().sovjp(&Y, &A, &B, &mut out);
        assert!(max_abs_diff(&out, &expected_sovjp()) < 1e-8, "{out:?}");
        // differencing a differenced vjp loses about half the digits
        toy().sovjp(&Y, &A, &B, &mut out);
        assert!(max_abs_diff(&out, &expected_sovjp()) < 1e-3, "{out:?}");
    }

    #[test]
    fn fallback_sovjp_is_symmetric() {
        let sys = toy_with_vjp();
        let c = [-0.4, 0.9, 0.1];
        let (mut x, mut z) = ([0.0; 3], [0.0; 3]);
        sys.sovjp(&Y, &A, &B, &mut x);
        sys.sovjp(&Y, &A, &c, &mut z);
        // a_m b_i F_{m,ij} c_j is symmetric under b <-> c
        assert!((dot(&x, &c) - dot(&z, &B)).abs() < 1e-8);
    }

    #[test]
    fn zero_direction_is_exactly_zero() {
        let sys = toy();
        let mut out = [1.0; 3];
        fd_jvp(&sys, &[1.0, 2.0, 3.0], &[0.0; 3], &mut out);
        assert_eq!(out, [0.0; 3]);
    }
}
