//! Scalar objectives of a trajectory's start and end states.

use crate::linalg::{dot, Matrix};

/// A scalar `T(pos0, pos1)` with its first and second partial derivatives.
///
/// `t01[i][j] = ∂²T/∂pos0_i ∂pos1_j`.
pub trait TwoPointLoss: Send + Sync {
    fn value(&self, pos0: &[f64], pos1: &[f64]) -> f64;
    fn t0(&self, pos0: &[f64], pos1: &[f64]) -> Vec<f64>;
    fn t1(&self, pos0: &[f64], pos1: &[f64]) -> Vec<f64>;
    fn t00(&self, pos0: &[f64], pos1: &[f64]) -> Matrix;
    fn t01(&self, pos0: &[f64], pos1: &[f64]) -> Matrix;
    fn t11(&self, pos0: &[f64], pos1: &[f64]) -> Matrix;
}

impl<L: TwoPointLoss + ?Sized> TwoPointLoss for &L {
    fn value(&self, p0: &[f64], p1: &[f64]) -> f64 {
        (**self).value(p0, p1)
    }
    fn t0(&self, p0: &[f64], p1: &[f64]) -> Vec<f64> {
        (**self).t0(p0, p1)
    }
    fn t1(&self, p0: &[f64], p1: &[f64]) -> Vec<f64> {
        (**self).t1(p0, p1)
    }
    fn t00(&self, p0: &[f64], p1: &[f64]) -> Matrix {
        (**self).t00(p0, p1)
    }
    fn t01(&self, p0: &[f64], p1: &[f64]) -> Matrix {
        (**self).t01(p0, p1)
    }
    fn t11(&self, p0: &[f64], p1: &[f64]) -> Matrix {
        (**self).t11(p0, p1)
    }
}

/// Orbit nonclosure `Σ (pos0 − pos1)²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct L2Loss;

impl TwoPointLoss for L2Loss {
    fn value(&self, p0: &[f64], p1: &[f64]) -> f64 {
        p0.iter().zip(p1).map(|(a, b)| (a - b) * (a - b)).sum()
    }
    fn t0(&self, p0: &[f64], p1: &[f64]) -> Vec<f64> {
        p0.iter().zip(p1).map(|(a, b)| 2.0 * (a - b)).collect()
    }
    fn t1(&self, p0: &[f64], p1: &[f64]) -> Vec<f64> {
        p0.iter().zip(p1).map(|(a, b)| -2.0 * (a - b)).collect()
    }
    fn t00(&self, p0: &[f64], _: &[f64]) -> Matrix {
        Matrix::scaled_identity(p0.len(), 2.0)
    }
    fn t01(&self, p0: &[f64], _: &[f64]) -> Matrix {
        Matrix::scaled_identity(p0.len(), -2.0)
    }
    fn t11(&self, p0: &[f64], _: &[f64]) -> Matrix {
        Matrix::scaled_identity(p0.len(), 2.0)
    }
}

/// An objective of the final state alone.
pub trait EndpointLoss: Send + Sync {
    fn value(&self, y: &[f64]) -> f64;
    fn grad(&self, y: &[f64]) -> Vec<f64>;
    fn hess(&self, y: &[f64]) -> Matrix;
}

/// `|y|²`, the squared distance of the final state from the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SquaredNorm;

impl EndpointLoss for SquaredNorm {
    fn value(&self, y: &[f64]) -> f64 {
        dot(y, y)
    }
    fn grad(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| 2.0 * v).collect()
    }
    fn hess(&self, y: &[f64]) -> Matrix {
        Matrix::scaled_identity(y.len(), 2.0)
    }
}

/// Views an [`EndpointLoss`] as a [`TwoPointLoss`] that ignores `pos0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AtEndpoint<L>(pub L);

impl<L: EndpointLoss> TwoPointLoss for AtEndpoint<L> {
    fn value(&self, _: &[f64], p1: &[f64]) -> f64 {
        self.0.value(p1)
    }
    fn t0(&self, p0: &[f64], _: &[f64]) -> Vec<f64> {
        vec![0.0; p0.len()]
    }
    fn t1(&self, _: &[f64], p1: &[f64]) -> Vec<f64> {
        self.0.grad(p1)
    }
    fn t00(&self, p0: &[f64], _: &[f64]) -> Matrix {
        Matrix::zeros(p0.len(), p0.len())
    }
    fn t01(&self, p0: &[f64], p1: &[f64]) -> Matrix {
        Matrix::zeros(p0.len(), p1.len())
    }
    fn t11(&self, _: &[f64], p1: &[f64]) -> Matrix {
        self.0.hess(p1)
    }
}
