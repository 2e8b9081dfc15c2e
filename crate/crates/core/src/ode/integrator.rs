use serde::{Deserialize, Serialize};

use super::OdeSystem;
use crate::error::{check_dim, Error, Result};
use crate::linalg::max_abs_diff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classic fourth-order Runge–Kutta with a fixed step.
    Rk4Fixed,
    /// Dormand–Prince 5(4) embedded pair with adaptive step control.
    Rk45Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on accepted steps.
    pub max_steps: usize,
    /// Number of uniformly spaced output samples, endpoints included.
    /// Values below 2 record the endpoint only.
    pub dense_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            step: 1e-2,
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
            dense_samples: 0,
        }
    }
}

impl IntegratorConfig {
    /// Adaptive RK45 with `rtol = atol = tol`.
    pub fn rk45(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    pub fn rk4(step: f64) -> Self {
        Self {
            method: Method::Rk4Fixed,
            step,
            ..Self::default()
        }
    }

    pub fn with_dense_samples(mut self, n: usize) -> Self {
        self.dense_samples = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !in_unit(self.rtol) || !in_unit(self.atol) {
            return Err(Error::InvalidConfig(format!(
                "rtol and atol must lie in (0, 1), got {} and {}",
                self.rtol, self.atol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub endpoint: Vec<f64>,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

/// Integrates `system` from `(t0, y0)` to `t1`. `t1 < t0` steps backwards.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(system.dim(), y0.len())?;
    config.validate()?;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "non-finite time interval [{t0}, {t1}]"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    system.validate(y0)?;

    if t0 == t1 {
        return Ok(Recorder::new(t0, t1, 0, y0).finish(y0.to_vec(), 0, 0));
    }
    let mut rec = Recorder::new(t0, t1, config.dense_samples, y0);
    let (endpoint, n_accepted, n_rejected) = match config.method {
        Method::Rk4Fixed => rk4(system, y0, t0, t1, config, &mut rec)?,
        Method::Rk45Adaptive => dopri(system, y0, t0, t1, config, &mut rec)?,
    };
    Ok(rec.finish(endpoint, n_accepted, n_rejected))
}

type Outcome = Result<(Vec<f64>, usize, usize)>;

/// Max-abs coordinate distance between `y0` and the result of integrating
/// `t0 → t1 → t0`.
pub fn reverse_check<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    let cfg = IntegratorConfig {
        dense_samples: 0,
        ..*config
    };
    let fwd = integrate(system, y0, t0, t1, &cfg)?;
    let back = integrate(system, &fwd.endpoint, t1, t0, &cfg)?;
    Ok(max_abs_diff(y0, &back.endpoint))
}

/// Collects dense-output samples by cubic Hermite interpolation of accepted steps.
struct Recorder {
    t1: f64,
    targets: Vec<f64>,
    next: usize,
    forward: bool,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Recorder {
    fn new(t0: f64, t1: f64, n: usize, y0: &[f64]) -> Self {
        let targets: Vec<f64> = if n >= 2 {
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        t1
                    } else {
                        t0 + (t1 - t0) * (k as f64) / ((n - 1) as f64)
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut rec = Self {
            t1,
            targets,
            next: 0,
            forward: t1 >= t0,
            times: Vec::new(),
            states: Vec::new(),
        };
        if !rec.targets.is_empty() {
            rec.times.push(t0);
            rec.states.push(y0.to_vec());
            rec.next = 1;
        }
        rec
    }

    /// Records all pending sample times inside the step `[ta, tb]`, excluding
    /// the final target which is filled from the exact endpoint.
    fn step(&mut self, ta: f64, ya: &[f64], fa: &[f64], tb: f64, yb: &[f64], fb: &[f64]) {
        let h = tb - ta;
        while self.next + 1 < self.targets.len() {
            let t = self.targets[self.next];
            let inside = if self.forward { t <= tb } else { t >= tb };
            if !inside {
                break;
            }
            let th = (t - ta) / h;
            let (th2, th3) = (th * th, th * th * th);
            let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
            let h10 = th3 - 2.0 * th2 + th;
            let h01 = -2.0 * th3 + 3.0 * th2;
            let h11 = th3 - th2;
            let y = (0..ya.len())
                .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
                .collect();
            self.times.push(t);
            self.states.push(y);
            self.next += 1;
        }
    }

    fn finish(mut self, endpoint: Vec<f64>, n_accepted: usize, n_rejected: usize) -> Trajectory {
        self.times.push(self.t1);
        self.states.push(endpoint.clone());
        Trajectory {
            times: self.times,
            states: self.states,
            endpoint,
            n_accepted,
            n_rejected,
        }
    }
}

fn rk4<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    rec: &mut Recorder,
) -> Outcome {
    let d = y0.len();
    let span = (t1 - t0).abs();
    let n = ((span / cfg.step) - 1e-9).ceil().max(1.0) as usize;
    if n > cfg.max_steps {
        return Err(Error::MaxStepsExceeded {
            t: t0,
            steps: cfg.max_steps,
        });
    }
    let h = (t1 - t0) / n as f64;
    let mut y = y0.to_vec();
    let mut ynew = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    let mut k1 = vec![0.0; d];
    let (mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    sys.rate(t0, &y, &mut k1);
    for step in 0..n {
        let t = t0 + h * step as f64;
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.rate(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.rate(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.rate(t + h, &tmp, &mut k4);
        for i in 0..d {
            ynew[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let tn = if step + 1 == n { t1 } else { t + h };
        if ynew.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: tn });
        }
        sys.validate(&ynew)?;
        // k2 is free here; reuse it as the rate at the new point
        sys.rate(tn, &ynew, &mut k2);
        rec.step(t, &y, &k1, tn, &ynew, &k2);
        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut k1, &mut k2);
    }
    Ok((y, n, 0))
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    rec: &mut Recorder,
) -> Outcome {
    let d = y0.len();
    let dir = (t1 - t0).signum();
    let mut y = y0.to_vec();
    let mut ynew = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    let mut k = [(); 7].map(|_| vec![0.0; d]);
    sys.rate(t0, &y, &mut k[0]);

    let mut t = t0;
    let mut h = cfg.step.min((t1 - t0).abs());
    let mut n_acc = 0usize;
    let mut n_rej = 0usize;
    let mut last_rejected = false;
    let mut last_nonfinite = false;

    loop {
        let remaining = (t1 - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(if last_nonfinite {
                Error::NonFiniteState { t }
            } else {
                Error::MaxStepsExceeded { t, steps: n_acc }
            });
        }
        let hs = dir * h;

        {
            let (k0, rest) = k.split_first_mut().unwrap();
            let [k2, k3, k4, k5, k6, k7] = rest else {
                unreachable!()
            };
            for i in 0..d {
                tmp[i] = y[i] + hs * A21 * k0[i];
            }
            sys.rate(t + C2 * hs, &tmp, k2);
            for i in 0..d {
                tmp[i] = y[i] + hs * (A31 * k0[i] + A32 * k2[i]);
            }
            sys.rate(t + C3 * hs, &tmp, k3);
            for i in 0..d {
                tmp[i] = y[i] + hs * (A41 * k0[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.rate(t + C4 * hs, &tmp, k4);
            for i in 0..d {
                tmp[i] = y[i] + hs * (A51 * k0[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.rate(t + C5 * hs, &tmp, k5);
            for i in 0..d {
                tmp[i] = y[i]
                    + hs * (A61 * k0[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.rate(t + hs, &tmp, k6);
            for i in 0..d {
                ynew[i] =
                    y[i] + hs * (B1 * k0[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            sys.rate(t + hs, &ynew, k7);
        }

        let mut err: f64 = 0.0;
        for i in 0..d {
            let e = hs
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let scale = cfg.atol + cfg.rtol * y[i].abs().max(ynew[i].abs());
            let r = e.abs() / scale;
            // NaN must not compare as acceptable
            if r > err || r.is_nan() {
                err = r;
            }
        }

        if err.is_finite() && err <= 1.0 {
            let tn = if last { t1 } else { t + hs };
            sys.validate(&ynew)?;
            rec.step(t, &y, &k[0], tn, &ynew, &k[6]);
            t = tn;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            n_acc += 1;
            last_nonfinite = false;
            if last {
                break;
            }
            if n_acc >= cfg.max_steps {
                return Err(Error::MaxStepsExceeded { t, steps: n_acc });
            }
            let mut factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h *= factor;
        } else {
            n_rej += 1;
            last_rejected = true;
            last_nonfinite = !err.is_finite();
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= factor;
        }
    }
    Ok((y, n_acc, n_rej))
}
