use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;
use crate::ode::OdeSystem;

/// Kepler problem in three dimensions with unit gravitational parameter,
/// `F(q, p) = (p, −q/|q|³)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Kepler;

pub fn kepler() -> Kepler {
    Kepler
}

const SINGULAR_RADIUS: f64 = 1e-12;

impl Kepler {
    /// `½|p|² − 1/|q|`.
    pub fn energy(&self, y: &[f64]) -> Result<f64> {
        check_dim(6, y.len())?;
        self.validate(y)?;
        let (q, p) = y.split_at(3);
        Ok(0.5 * dot(p, p) - 1.0 / dot(q, q).sqrt())
    }
}

fn inv_powers(q: &[f64]) -> (f64, f64, f64) {
    let r2 = dot(q, q);
    let r = r2.sqrt();
    let r3 = 1.0 / (r2 * r);
    (r3, r3 / r2, r3 / (r2 * r2))
}

impl OdeSystem for Kepler {
    fn dim(&self) -> usize {
        6
    }

    fn validate(&self, y: &[f64]) -> Result<()> {
        let r = dot(&y[..3], &y[..3]).sqrt();
        if r < SINGULAR_RADIUS {
            Err(Error::SingularConfiguration { separation: r })
        } else {
            Ok(())
        }
    }

    fn rate(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let (q, p) = y.split_at(3);
        let (r3, _, _) = inv_powers(q);
        for i in 0..3 {
            out[i] = p[i];
            out[i + 3] = -q[i] * r3;
        }
    }

    fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        let q = &y[..3];
        let (vq, vp) = v.split_at(3);
        let (r3, r5, _) = inv_powers(q);
        let qv = dot(q, vq);
        for i in 0..3 {
            out[i] = vp[i];
            out[i + 3] = -r3 * vq[i] + 3.0 * r5 * q[i] * qv;
        }
    }

    fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
        let q = &y[..3];
        let (sq, sp) = s.split_at(3);
        let (r3, r5, _) = inv_powers(q);
        let qs = dot(q, sp);
        for i in 0..3 {
            out[i] = -r3 * sp[i] + 3.0 * r5 * q[i] * qs;
            out[i + 3] = sq[i];
        }
    }

    fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        let q = &y[..3];
        let ap = &a[3..];
        let bq = &b[..3];
        let (_, r5, r7) = inv_powers(q);
        let (ab, aq, bqq) = (dot(ap, bq), dot(ap, q), dot(bq, q));
        for j in 0..3 {
            out[j] =
                3.0 * r5 * (ab * q[j] + ap[j] * bqq + bq[j] * aq) - 15.0 * r7 * aq * bqq * q[j];
            out[j + 3] = 0.0;
        }
    }
}
