use std::borrow::Cow;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, dot, Matrix};
use crate::ode::OdeSystem;

/// Coefficients of `F_i = P1_ik y_k + ½ P2_ikl y_k y_l [+ ⅙ P3_iklm y_k y_l y_m]`,
/// stored row-major with the output index first.
///
/// Each block is symmetric in its input indices and scaled so that, for
/// independent standard-normal input vectors, every output component of its
/// contraction has unit expected square. Sampling iid `N(0,1)` entries and
/// averaging over the `k!` input permutations leaves, per output component,
/// one unit of variance for each multiset of input indices, of which there
/// are `C(D+k−1, k)`. The scale is therefore `1/√C(D+k−1, k)`:
/// `1/√D`, `√(2/(D(D+1)))`, `√(6/(D(D+1)(D+2)))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyOdeCoeffs {
    pub dim: usize,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Option<Vec<f64>>,
    pub seed: u64,
}

impl PolyOdeCoeffs {
    pub fn sample(dim: usize, max_order: usize, seed: u64) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        assert!(matches!(max_order, 2 | 3), "max_order must be 2 or 3");
        let d = dim;
        let df = d as f64;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut normal =
            |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };

        let s1 = 1.0 / df.sqrt();
        let p1: Vec<f64> = normal(d * d).into_iter().map(|v| v * s1).collect();

        let raw = normal(d * d * d);
        let s2 = (2.0 / (df * (df + 1.0))).sqrt();
        let mut p2 = vec![0.0; d * d * d];
        for i in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let a = raw[(i * d + k) * d + l];
                    let b = raw[(i * d + l) * d + k];
                    p2[(i * d + k) * d + l] = 0.5 * (a + b) * s2;
                }
            }
        }

        let p3 = (max_order == 3).then(|| {
            let raw = normal(d * d * d * d);
            let s3 = (6.0 / (df * (df + 1.0) * (df + 2.0))).sqrt();
            let at = |i: usize, k: usize, l: usize, m: usize| raw[((i * d + k) * d + l) * d + m];
            let mut p3 = vec![0.0; d * d * d * d];
            for i in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        for m in 0..d {
                            let sum = at(i, k, l, m)
                                + at(i, k, m, l)
                                + at(i, l, k, m)
                                + at(i, l, m, k)
                                + at(i, m, k, l)
                                + at(i, m, l, k);
                            p3[((i * d + k) * d + l) * d + m] = sum / 6.0 * s3;
                        }
                    }
                }
            }
            p3
        });

        Self {
            dim,
            p1,
            p2,
            p3,
            seed,
        }
    }
}

/// Random polynomial ODE with analytic derivative contractions.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPoly {
    coeffs: PolyOdeCoeffs,
}

/// Deterministic in `seed`; `max_order` is 2 or 3.
pub fn random_poly_system(dim: usize, max_order: usize, seed: u64) -> RandomPoly {
    RandomPoly {
        coeffs: PolyOdeCoeffs::sample(dim, max_order, seed),
    }
}

impl RandomPoly {
    pub fn from_coeffs(coeffs: PolyOdeCoeffs) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &PolyOdeCoeffs {
        &self.coeffs
    }

    /// A standard-normal start point drawn from a stream independent of the
    /// coefficient stream.
    pub fn random_start(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(1);
        (0..self.coeffs.dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    }

    /// `F_{m,ij}(y)` as a `D×D×D` array: `P2`, plus `P3·y` for cubic systems.
    fn second_derivative(&self, y: &[f64]) -> Cow<'_, [f64]> {
        let d = self.coeffs.dim;
        match &self.coeffs.p3 {
            None => Cow::Borrowed(&self.coeffs.p2),
            Some(p3) => {
                let mut t = self.coeffs.p2.clone();
                for (tv, chunk) in t.iter_mut().zip(p3.chunks_exact(d)) {
                    *tv += dot(chunk, y);
                }
                Cow::Owned(t)
            }
        }
    }

    /// Jacobian `J_ik = P1_ik + P2_ikl y_l [+ ½ P3_iklm y_l y_m]`.
    pub fn jacobian(&self, y: &[f64]) -> Matrix {
        let d = self.coeffs.dim;
        let mut j = self.coeffs.p1.clone();
        match &self.coeffs.p3 {
            None => {
                for (jv, chunk) in j.iter_mut().zip(self.coeffs.p2.chunks_exact(d)) {
                    *jv += dot(chunk, y);
                }
            }
            Some(p3) => {
                // P2 + ½ P3·y, then contract with y
                let mut half = self.coeffs.p2.clone();
                for (hv, chunk) in half.iter_mut().zip(p3.chunks_exact(d)) {
                    *hv += 0.5 * dot(chunk, y);
                }
                for (jv, chunk) in j.iter_mut().zip(half.chunks_exact(d)) {
                    *jv += dot(chunk, y);
                }
            }
        }
        Matrix::from_row_major(d, d, j)
    }
}

impl OdeSystem for RandomPoly {
    fn dim(&self) -> usize {
        self.coeffs.dim
    }

    fn rate(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let d = self.coeffs.dim;
        // M_ik = P2_ikl y_l [+ ⅓ P3_iklm y_l y_m], F = P1 y + ½ M y
        let mut m = vec![0.0; d * d];
        match &self.coeffs.p3 {
            None => {
                for (mv, chunk) in m.iter_mut().zip(self.coeffs.p2.chunks_exact(d)) {
                    *mv = dot(chunk, y);
                }
            }
            Some(p3) => {
                let mut third = self.coeffs.p2.clone();
                for (tv, chunk) in third.iter_mut().zip(p3.chunks_exact(d)) {
                    *tv += dot(chunk, y) / 3.0;
                }
                for (mv, chunk) in m.iter_mut().zip(third.chunks_exact(d)) {
                    *mv = dot(chunk, y);
                }
            }
        }
        for i in 0..d {
            let row = &self.coeffs.p1[i * d..(i + 1) * d];
            let mrow = &m[i * d..(i + 1) * d];
            out[i] = dot(row, y) + 0.5 * dot(mrow, y);
        }
    }

    fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.jacobian(y).matvec(v));
    }

    fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.jacobian(y).vecmat(s));
    }

    fn vjp_rows(&self, y: &[f64], rows: &[f64], out: &mut [f64]) {
        let d = self.coeffs.dim;
        let h = Matrix::from_row_major(rows.len() / d, d, rows.to_vec());
        out.copy_from_slice(h.matmul(&self.jacobian(y)).as_slice());
    }

    fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        let d = self.coeffs.dim;
        let t = self.second_derivative(y);
        out.fill(0.0);
        for (m, &am) in a.iter().enumerate() {
            if am == 0.0 {
                continue;
            }
            for (i, &bi) in b.iter().enumerate() {
                let c = am * bi;
                if c != 0.0 {
                    axpy(c, &t[(m * d + i) * d..(m * d + i + 1) * d], out);
                }
            }
        }
    }

    fn sigma_hessian(&self, y: &[f64], sigma: &[f64], out: &mut [f64]) {
        let d = self.coeffs.dim;
        let t = self.second_derivative(y);
        out.fill(0.0);
        for (m, &sm) in sigma.iter().enumerate() {
            if sm != 0.0 {
                axpy(sm, &t[m * d * d..(m + 1) * d * d], out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = PolyOdeCoeffs::sample(4, 3, 7);
        let b = PolyOdeCoeffs::sample(4, 3, 7);
        assert_eq!(a, b);
        assert_ne!(a, PolyOdeCoeffs::sample(4, 3, 8));
    }

    #[test]
    fn p2_symmetric_in_inputs() {
        let c = PolyOdeCoeffs::sample(5, 2, 1);
        let d = 5;
        for i in 0..d {
            for k in 0..d {
                for l in 0..d {
                    assert_eq!(c.p2[(i * d + k) * d + l], c.p2[(i * d + l) * d + k]);
                }
            }
        }
    }
}
