use crate::error::{check_dim, Result};
use crate::linalg::dot;
use crate::ode::OdeSystem;

/// Three uncoupled unit harmonic oscillators, `F(y) = (y[3..], −y[..3])`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ho3;

pub fn ho3() -> Ho3 {
    Ho3
}

impl Ho3 {
    /// `½|y|²`.
    pub fn energy(&self, y: &[f64]) -> Result<f64> {
        check_dim(6, y.len())?;
        Ok(0.5 * dot(y, y))
    }
}

impl OdeSystem for Ho3 {
    fn dim(&self) -> usize {
        6
    }

    fn rate(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        self.jvp(y, y, out);
    }

    fn jvp(&self, _y: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..3 {
            out[i] = v[i + 3];
            out[i + 3] = -v[i];
        }
    }

    fn vjp(&self, _y: &[f64], s: &[f64], out: &mut [f64]) {
        for i in 0..3 {
            out[i] = -s[i + 3];
            out[i + 3] = s[i];
        }
    }

    fn sovjp(&self, _y: &[f64], _a: &[f64], _b: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn sigma_hessian(&self, _y: &[f64], _sigma: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}
