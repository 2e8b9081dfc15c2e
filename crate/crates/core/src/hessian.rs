use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HessianMethod {
    /// Joint backward evolution of state, gradient and Hessian.
    Dp,
    /// Row-by-row backpropagation of the backpropagation.
    Bp2,
    /// Nested central finite differences.
    Fd,
}

impl fmt::Display for HessianMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dp => "dp",
            Self::Bp2 => "bp2",
            Self::Fd => "fd",
        })
    }
}

impl FromStr for HessianMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(Self::Dp),
            "bp2" => Ok(Self::Bp2),
            "fd" => Ok(Self::Fd),
            other => Err(format!(
                "unknown Hessian method '{other}' (expected dp, bp2 or fd)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianResult {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian_raw: Matrix,
    pub hessian_sym: Matrix,
    /// `|H − Hᵀ|∞` of the raw Hessian.
    pub asymmetry: f64,
    pub method: HessianMethod,
}

impl HessianResult {
    pub fn new(value: f64, gradient: Vec<f64>, hessian_raw: Matrix, method: HessianMethod) -> Self {
        let asymmetry = hessian_raw.asymmetry();
        let hessian_sym = hessian_raw.symmetrized();
        Self {
            value,
            gradient,
            hessian_raw,
            hessian_sym,
            asymmetry,
            method,
        }
    }
}
