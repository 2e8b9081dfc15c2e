#![allow(dead_code)]

use hessode::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// `exp(A)` by scaling and squaring of a Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.rows();
    let norm = a.as_slice().iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let mut scaled = a.clone();
    scaled.scale(0.5f64.powi(squarings as i32));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled);
        term.scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Central-difference Jacobian of `f` at `x`, column `k` = `∂f/∂x_k`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], eps: f64) -> Matrix {
    let m = f(x).len();
    let mut jac = Matrix::zeros(m, x.len());
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += eps;
        xm[k] -= eps;
        let (fp, fm) = (f(&xp), f(&xm));
        for i in 0..m {
            jac[(i, k)] = (fp[i] - fm[i]) / (xp[k] - xm[k]);
        }
    }
    jac
}
