use crate::linalg::Matrix;
use crate::ode::OdeSystem;

/// `F(y) = A·y`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
}

pub fn linear(a: Matrix) -> LinearSystem {
    assert!(a.is_square(), "linear system needs a square matrix");
    LinearSystem { a }
}

impl LinearSystem {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl OdeSystem for LinearSystem {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn rate(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.matvec(y));
    }

    fn jvp(&self, _y: &[f64], v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.matvec(v));
    }

    fn vjp(&self, _y: &[f64], s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.vecmat(s));
    }

    fn sovjp(&self, _y: &[f64], _a: &[f64], _b: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn vjp_rows(&self, _y: &[f64], rows: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let h = Matrix::from_row_major(rows.len() / d, d, rows.to_vec());
        out.copy_from_slice(h.matmul(&self.a).as_slice());
    }

    fn sigma_hessian(&self, _y: &[f64], _sigma: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}
