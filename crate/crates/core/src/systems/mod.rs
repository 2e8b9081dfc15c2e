//! Built-in systems: three Hamiltonian benchmarks in `concat(q, p)` layout, a
//! generic linear system, and random polynomial ODEs.

mod harmonic;
mod kepler;
mod linear;
mod random_poly;
mod three_body;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::OdeSystem;

pub use harmonic::{ho3, Ho3};
pub use kepler::{kepler, Kepler};
pub use linear::{linear, LinearSystem};
pub use random_poly::{random_poly_system, PolyOdeCoeffs, RandomPoly};
pub use three_body::{p3bp, ThreeBody};

/// Initial conditions and orbit times for the built-in orbit problems.
///
/// The 2π orbit times are rounded to 11 digits on purpose, not `TAU`.
#[allow(clippy::approx_constant)]
pub mod presets {
    /// Harmonic oscillator start, a closed orbit of period `HO3_T`.
    pub const HO3_Y0: [f64; 6] = [50.0, 10.0, 50.0, -20.0, 10.0, -0.1];
    pub const HO3_T: f64 = 6.28318530718;

    pub const KEPLER_Y0_INIT: [f64; 6] = [0.1, 0.2, -0.33, -0.2, 0.5, -0.1];
    pub const KEPLER_T: f64 = 6.28318530718;

    /// Approximate figure-eight start for three unit masses.
    pub const P3BP_Y0_INIT: [f64; 12] = [
        -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.347111, 0.532728, 0.347111, 0.532728, -0.694222, -1.065456,
    ];
    pub const P3BP_T: f64 = 6.324449;
}

/// CLI-facing system names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemTag {
    Ho3,
    Kepler,
    P3bp,
    Randpoly,
}

impl SystemTag {
    pub const ALL: [SystemTag; 4] = [Self::Ho3, Self::Kepler, Self::P3bp, Self::Randpoly];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ho3 => "ho3",
            Self::Kepler => "kepler",
            Self::P3bp => "p3bp",
            Self::Randpoly => "randpoly",
        }
    }

    /// Instantiates the system. `dim` and `seed` only apply to `randpoly`.
    pub fn build(self, dim: usize, seed: u64) -> Box<dyn OdeSystem> {
        match self {
            Self::Ho3 => Box::new(ho3()),
            Self::Kepler => Box::new(kepler()),
            Self::P3bp => Box::new(p3bp()),
            Self::Randpoly => Box::new(random_poly_system(dim, 2, seed)),
        }
    }
}

impl fmt::Display for SystemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown system '{s}' (expected ho3, kepler, p3bp or randpoly)"))
    }
}

/// Hamiltonian of a tagged system at `y`.
pub fn energy(tag: SystemTag, y: &[f64]) -> Result<f64> {
    match tag {
        SystemTag::Ho3 => ho3().energy(y),
        SystemTag::Kepler => kepler().energy(y),
        SystemTag::P3bp => p3bp().energy(y),
        SystemTag::Randpoly => Err(Error::InvalidConfig(
            "randpoly systems have no Hamiltonian".into(),
        )),
    }
}
