//! Closed-orbit search by minimizing orbit nonclosure, with Hessian
//! eigen-analysis of the solutions found.

mod bfgs;
mod eigen;

use serde::{Deserialize, Serialize};

pub use bfgs::{minimize, BfgsOptions, BfgsOutcome, Termination};
pub use eigen::eigh;

use crate::error::{check_dim, Error, Result};
use crate::fd_oracle::{fd_hessian_result, FdConfig};
use crate::hessian::{HessianMethod, HessianResult};
use crate::hessian_bp2::{bp2_hessian, nc_gradient, nc_value};
use crate::hessian_dp::dp_hessian_two_point;
use crate::linalg::{max_abs, max_abs_diff, Matrix};
use crate::loss::{L2Loss, TwoPointLoss};
use crate::ode::{integrate, IntegratorConfig, OdeSystem};

/// Default relative threshold for counting flat directions.
pub const DEFAULT_FLAT_THRESHOLD: f64 = 1e-8;

/// Nonclosure minimization over start states for a fixed orbit time.
#[derive(Clone, Debug)]
pub struct OrbitProblem<S, L = L2Loss> {
    pub system: S,
    pub loss: L,
    pub t_final: f64,
    pub config: IntegratorConfig,
}

impl<S: OdeSystem> OrbitProblem<S> {
    /// Squared-distance nonclosure at orbit time `t_final`.
    pub fn new(system: S, t_final: f64, config: IntegratorConfig) -> Self {
        Self {
            system,
            loss: L2Loss,
            t_final,
            config,
        }
    }
}

impl<S: OdeSystem, L: TwoPointLoss> OrbitProblem<S, L> {
    pub fn with_loss<M: TwoPointLoss>(self, loss: M) -> OrbitProblem<S, M> {
        OrbitProblem {
            system: self.system,
            loss,
            t_final: self.t_final,
            config: self.config,
        }
    }

    pub fn value(&self, y0: &[f64]) -> Result<f64> {
        nc_value(&self.system, &self.loss, y0, self.t_final, &self.config)
    }

    pub fn value_and_gradient(&self, y0: &[f64]) -> Result<(f64, Vec<f64>)> {
        let g = nc_gradient(&self.system, &self.loss, y0, self.t_final, &self.config)?;
        Ok((g.value, g.gradient))
    }

    pub fn hessian(&self, y0: &[f64], method: HessianMethod) -> Result<HessianResult> {
        match method {
            HessianMethod::Bp2 => {
                bp2_hessian(&self.system, &self.loss, y0, self.t_final, &self.config)
            }
            HessianMethod::Dp => {
                dp_hessian_two_point(&self.system, &self.loss, y0, self.t_final, &self.config)
            }
            HessianMethod::Fd => {
                let mut r = fd_hessian_result(|x| self.value(x), y0, &FdConfig::default())?;
                // the backpropagated gradient is far more accurate than differencing
                r.gradient = self.value_and_gradient(y0)?.1;
                Ok(r)
            }
        }
    }

    /// Samples the orbit starting at `y0` over one period.
    pub fn trajectory(&self, y0: &[f64], samples: usize) -> Result<crate::ode::Trajectory> {
        let cfg = self.config.with_dense_samples(samples);
        integrate(&self.system, y0, 0.0, self.t_final, &cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindOrbitOptions {
    pub bfgs: BfgsOptions,
    pub hessian: HessianMethod,
    /// See [`flat_directions`].
    pub flat_threshold: f64,
}

impl Default for FindOrbitOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            hessian: HessianMethod::Bp2,
            flat_threshold: DEFAULT_FLAT_THRESHOLD,
        }
    }
}

impl FindOrbitOptions {
    pub fn with_gtol(mut self, gtol: f64) -> Self {
        self.bfgs.gtol = gtol;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub y0: Vec<f64>,
    pub nc_value: f64,
    pub gradient: Vec<f64>,
    /// `|gradient|∞`.
    pub grad_norm: f64,
    pub hessian: HessianResult,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: Matrix,
    pub n_flat: usize,
    pub flat_threshold: f64,
    pub n_calls: usize,
    pub iterations: usize,
    pub termination: Option<Termination>,
}

impl OrbitReport {
    /// Largest eigenvalue magnitude.
    pub fn lambda_max(&self) -> f64 {
        max_abs(&self.eigenvalues)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn eigen_index_near(&self, target: f64) -> usize {
        (0..self.eigenvalues.len())
            .min_by(|&a, &b| {
                (self.eigenvalues[a] - target)
                    .abs()
                    .total_cmp(&(self.eigenvalues[b] - target).abs())
            })
            .unwrap_or(0)
    }
}

/// Number of eigenvalues with `|λ| < flat_threshold·max(1, λ_max)`.
pub fn flat_directions(report: &OrbitReport, flat_threshold: f64) -> usize {
    count_flat(&report.eigenvalues, flat_threshold)
}

fn count_flat(eigenvalues: &[f64], flat_threshold: f64) -> usize {
    let cut = flat_threshold * max_abs(eigenvalues).max(1.0);
    eigenvalues.iter().filter(|l| l.abs() < cut).count()
}

/// Builds a report at `y0` without optimizing.
pub fn analyze<S: OdeSystem, L: TwoPointLoss>(
    problem: &OrbitProblem<S, L>,
    y0: &[f64],
    method: HessianMethod,
    flat_threshold: f64,
) -> Result<OrbitReport> {
    check_dim(problem.system.dim(), y0.len())?;
    let hessian = problem.hessian(y0, method)?;
    let (eigenvalues, eigenvectors) = eigh(&hessian.hessian_sym)?;
    Ok(OrbitReport {
        y0: y0.to_vec(),
        nc_value: hessian.value,
        grad_norm: max_abs(&hessian.gradient),
        gradient: hessian.gradient.clone(),
        n_flat: count_flat(&eigenvalues, flat_threshold),
        flat_threshold,
        eigenvalues,
        eigenvectors,
        hessian,
        n_calls: 0,
        iterations: 0,
        termination: None,
    })
}

/// BFGS minimization of the nonclosure from `y0_init`, then a report at the
/// final point.
///
/// A line search that cannot lower the objective ends the run successfully
/// when the gradient is below `sqrt(gtol)` and the value below `1e-12`; the
/// remaining gradient is then integration noise. Otherwise it fails with
/// [`Error::LineSearchFailure`]. Running out of iterations fails with
/// [`Error::DidNotConverge`]. Both errors carry the best report.
pub fn find_orbit<S: OdeSystem, L: TwoPointLoss>(
    problem: &OrbitProblem<S, L>,
    y0_init: &[f64],
    options: &FindOrbitOptions,
) -> Result<OrbitReport> {
    check_dim(problem.system.dim(), y0_init.len())?;
    let outcome = minimize(|x| problem.value_and_gradient(x), y0_init, &options.bfgs)?;
    let mut report = analyze(problem, &outcome.x, options.hessian, options.flat_threshold)?;
    report.n_calls = outcome.n_calls;
    report.iterations = outcome.iterations;
    report.termination = Some(outcome.termination);
    match outcome.termination {
        Termination::GradientTolerance => Ok(report),
        Termination::LineSearchStalled
            if report.grad_norm <= options.bfgs.gtol.sqrt() && report.nc_value < 1e-12 =>
        {
            Ok(report)
        }
        Termination::LineSearchStalled => Err(Error::LineSearchFailure {
            value: report.nc_value,
            best: Box::new(report),
        }),
        Termination::MaxIterations => Err(Error::DidNotConverge {
            iterations: outcome.iterations,
            value: report.nc_value,
            best: Box::new(report),
        }),
    }
}

/// Perturbs a solution along one Hessian eigenvector and reconverges.
///
/// Fails with [`Error::ReconvergedToOriginal`] when the optimizer returns to
/// within `1e-6` (max-abs) of the original start state.
pub fn deform_and_reconverge<S: OdeSystem, L: TwoPointLoss>(
    problem: &OrbitProblem<S, L>,
    report: &OrbitReport,
    eig_index: usize,
    step: f64,
    options: &FindOrbitOptions,
) -> Result<OrbitReport> {
    let d = report.y0.len();
    if eig_index >= d {
        return Err(Error::IndexOutOfRange {
            index: eig_index,
            dim: d,
        });
    }
    let direction = report.eigenvector(eig_index);
    let start: Vec<f64> = report
        .y0
        .iter()
        .zip(&direction)
        .map(|(y, v)| y + step * v)
        .collect();
    let new = find_orbit(problem, &start, options)?;
    let distance = max_abs_diff(&new.y0, &report.y0);
    if distance < 1e-6 {
        return Err(Error::ReconvergedToOriginal {
            distance,
            report: Box::new(new),
        });
    }
    Ok(new)
}

/// Smallest Hausdorff distance between any two mass tracks, each track taken
/// as the polyline through its samples. `tracks[mass][sample]`.
pub fn min_track_separation(tracks: &[Vec<[f64; 2]>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..tracks.len() {
        for j in (i + 1)..tracks.len() {
            let h = directed_hausdorff(&tracks[i], &tracks[j])
                .max(directed_hausdorff(&tracks[j], &tracks[i]));
            best = best.min(h);
        }
    }
    best
}

fn directed_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .map(|p| {
            if b.len() == 1 {
                return dist(*p, b[0]);
            }
            b.windows(2)
                .map(|s| segment_distance(*p, s[0], s[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_of_shifted_samples_on_one_curve_is_small() {
        let circle = |phase: f64| -> Vec<[f64; 2]> {
            (0..=200)
                .map(|k| {
                    let t = phase + k as f64 * std::f64::consts::TAU / 200.0;
                    [t.cos(), t.sin()]
                })
                .collect()
        };
        let tracks = vec![circle(0.0), circle(0.013), circle(1.0)];
        assert!(min_track_separation(&tracks) < 1e-3);
        let far = vec![
            circle(0.0),
            circle(0.0)
                .iter()
                .map(|p| [p[0] * 1.1, p[1] * 1.1])
                .collect(),
        ];
        assert!((min_track_separation(&far) - 0.1).abs() < 1e-9);
    }

    #[test]
    fn flat_count_is_relative() {
        assert_eq!(count_flat(&[1e-9, 1e-7, 100.0], 1e-8), 2);
        assert_eq!(count_flat(&[1e-9, 1e-7, 1e-3], 1e-8), 1);
        assert_eq!(count_flat(&[1e-9, 1e-7, 100.0], 1e-3), 2);
    }
}
