use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;
use crate::ode::OdeSystem;

/// Planar three-body problem with unit masses and unit gravitational constant.
///
/// Layout: `q = (q0x, q0y, q1x, q1y, q2x, q2y)` followed by the momenta in the
/// same order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ThreeBody;

pub fn p3bp() -> ThreeBody {
    ThreeBody
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const COLLISION_DISTANCE: f64 = 1e-10;

/// `d = q_l − q_k` with `1/r³, 1/r⁵, 1/r⁷`.
fn separation(q: &[f64], k: usize, l: usize) -> ([f64; 2], f64, f64, f64) {
    let d = [q[2 * l] - q[2 * k], q[2 * l + 1] - q[2 * k + 1]];
    let r2 = d[0] * d[0] + d[1] * d[1];
    let r3 = 1.0 / (r2 * r2.sqrt());
    (d, r3, r3 / r2, r3 / (r2 * r2))
}

fn pair(v: &[f64], k: usize) -> [f64; 2] {
    [v[2 * k], v[2 * k + 1]]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Adds `c` to mass `l` and subtracts it from mass `k`.
fn scatter(out: &mut [f64], k: usize, l: usize, c: [f64; 2]) {
    for a in 0..2 {
        out[2 * l + a] += c[a];
        out[2 * k + a] -= c[a];
    }
}

impl ThreeBody {
    /// `½|p|² − Σ 1/r_kl`.
    pub fn energy(&self, y: &[f64]) -> Result<f64> {
        check_dim(12, y.len())?;
        self.validate(y)?;
        let (q, p) = y.split_at(6);
        let potential: f64 = PAIRS
            .iter()
            .map(|&(k, l)| {
                let (d, ..) = separation(q, k, l);
                1.0 / dot2(d, d).sqrt()
            })
            .sum();
        Ok(0.5 * dot(p, p) - potential)
    }

    /// Position of each mass over a trajectory: `tracks[mass][sample]`.
    pub fn tracks(states: &[Vec<f64>]) -> [Vec<[f64; 2]>; 3] {
        std::array::from_fn(|m| states.iter().map(|s| pair(s, m)).collect())
    }
}

impl OdeSystem for ThreeBody {
    fn dim(&self) -> usize {
        12
    }

    fn validate(&self, y: &[f64]) -> Result<()> {
        for &(k, l) in &PAIRS {
            let (d, ..) = separation(&y[..6], k, l);
            let r = dot2(d, d).sqrt();
            if r < COLLISION_DISTANCE {
                return Err(Error::SingularConfiguration { separation: r });
            }
        }
        Ok(())
    }

    fn rate(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let (q, p) = y.split_at(6);
        let (oq, op) = out.split_at_mut(6);
        oq.copy_from_slice(p);
        op.fill(0.0);
        // mass k is pulled towards l by d/r³, l towards k by the opposite
        for &(k, l) in &PAIRS {
            let (d, r3, ..) = separation(q, k, l);
            scatter(op, l, k, [d[0] * r3, d[1] * r3]);
        }
    }

    fn jvp(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        let q = &y[..6];
        let (vq, vp) = v.split_at(6);
        let (oq, op) = out.split_at_mut(6);
        oq.copy_from_slice(vp);
        op.fill(0.0);
        for &(k, l) in &PAIRS {
            let (d, r3, r5, _) = separation(q, k, l);
            let dv = [vq[2 * l] - vq[2 * k], vq[2 * l + 1] - vq[2 * k + 1]];
            let dd = dot2(d, dv);
            let kd = [
                r3 * dv[0] - 3.0 * r5 * d[0] * dd,
                r3 * dv[1] - 3.0 * r5 * d[1] * dd,
            ];
            scatter(op, l, k, kd);
        }
    }

    fn vjp(&self, y: &[f64], s: &[f64], out: &mut [f64]) {
        let q = &y[..6];
        let (sq, sp) = s.split_at(6);
        let (oq, op) = out.split_at_mut(6);
        op.copy_from_slice(sq);
        oq.fill(0.0);
        for &(k, l) in &PAIRS {
            let (d, r3, r5, _) = separation(q, k, l);
            let (spk, spl) = (pair(sp, k), pair(sp, l));
            let w = [spk[0] - spl[0], spk[1] - spl[1]];
            let wd = dot2(w, d);
            let u = [
                r3 * w[0] - 3.0 * r5 * d[0] * wd,
                r3 * w[1] - 3.0 * r5 * d[1] * wd,
            ];
            scatter(oq, k, l, u);
        }
    }

    fn sovjp(&self, y: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        let q = &y[..6];
        let ap = &a[6..];
        let bq = &b[..6];
        out.fill(0.0);
        for &(k, l) in &PAIRS {
            let (d, _, r5, r7) = separation(q, k, l);
            let (apk, apl) = (pair(ap, k), pair(ap, l));
            let alpha = [apk[0] - apl[0], apk[1] - apl[1]];
            let beta = [bq[2 * l] - bq[2 * k], bq[2 * l + 1] - bq[2 * k + 1]];
            let (ab, ad, bd) = (dot2(alpha, beta), dot2(alpha, d), dot2(beta, d));
            let c: [f64; 2] = std::array::from_fn(|j| {
                -(3.0 * r5 * (ab * d[j] + alpha[j] * bd + beta[j] * ad)
                    - 15.0 * r7 * ad * bd * d[j])
            });
            scatter(&mut out[..6], k, l, c);
        }
    }
}
