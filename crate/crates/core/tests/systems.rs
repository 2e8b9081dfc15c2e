mod common;

use common::{fd_jacobian, rng, uniform_vec};
use hessode::linalg::{dot, max_abs_diff};
use hessode::ode::OdeSystem;
use hessode::systems::{ho3, kepler, p3bp, random_poly_system, PolyOdeCoeffs};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rate_of(sys: &dyn OdeSystem) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |y| {
        let mut out = vec![0.0; sys.dim()];
        sys.rate(0.0, y, &mut out);
        out
    }
}

/// Checks jvp, vjp and sovjp of `sys` at `y` against central differences
/// of the rate function.
fn check_derivatives(sys: &dyn OdeSystem, y: &[f64], r: &mut ChaCha8Rng, tol: f64) {
    let d = sys.dim();
    let jac = fd_jacobian(rate_of(sys), y, 1e-6);
    let v = uniform_vec(r, d, 1.0);
    let s = uniform_vec(r, d, 1.0);

    let mut jv = vec![0.0; d];
    sys.jvp(y, &v, &mut jv);
    assert!(max_abs_diff(&jv, &jac.matvec(&v)) < tol, "jvp");

    let mut sj = vec![0.0; d];
    sys.vjp(y, &s, &mut sj);
    assert!(max_abs_diff(&sj, &jac.vecmat(&s)) < tol, "vjp");

    // d/dy_j of s·F'(y)v is s_m F_{m,ij} v_i
    let g = |x: &[f64]| {
        let mut out = vec![0.0; d];
        sys.jvp(x, &v, &mut out);
        vec![dot(&s, &out)]
    };
    let expected = fd_jacobian(g, y, 1e-6).row(0).to_vec();
    let mut so = vec![0.0; d];
    sys.sovjp(y, &s, &v, &mut so);
    assert!(
        max_abs_diff(&so, &expected) < tol,
        "sovjp {so:?} vs {expected:?}"
    );
}

#[test]
fn harmonic_derivatives() {
    let mut r = rng(1);
    let y = uniform_vec(&mut r, 6, 3.0);
    check_derivatives(&ho3(), &y, &mut r, 1e-7);
}

#[test]
fn kepler_derivatives() {
    let mut r = rng(2);
    let y = [0.7, -0.4, 0.3, 0.1, 0.9, -0.2];
    check_derivatives(&kepler(), &y, &mut r, 1e-6);
}

#[test]
fn three_body_derivatives() {
    let mut r = rng(3);
    let y = [
        -1.0, 0.1, 1.0, -0.05, 0.02, 0.6, 0.3, 0.5, 0.35, 0.5, -0.65, -1.0,
    ];
    check_derivatives(&p3bp(), &y, &mut r, 1e-6);
}

#[test]
fn random_poly_derivatives() {
    for order in [2, 3] {
        let sys = random_poly_system(7, order, 40 + order as u64);
        let mut r = rng(4);
        let y = uniform_vec(&mut r, 7, 1.0);
        check_derivatives(&sys, &y, &mut r, 1e-6);
    }
}

#[test]
fn singular_states_rejected() {
    assert!(kepler().validate(&[0.0; 6]).is_err());
    let mut y = [0.0; 12];
    y[0] = 1.0;
    y[2] = 1.0;
    assert!(p3bp().validate(&y).is_err());
}

#[test]
fn p2_contraction_has_unit_mean_square() {
    let d = 20;
    let c = PolyOdeCoeffs::sample(d, 2, 5);
    let mut r = rng(6);
    let n = 100_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let a: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
        let b: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
        for i in 0..d {
            let block = &c.p2[i * d * d..(i + 1) * d * d];
            let v: f64 = (0..d)
                .map(|k| a[k] * dot(&block[k * d..(k + 1) * d], &b))
                .sum();
            acc += v * v;
        }
    }
    let mean = acc / (n * d) as f64;
    assert!((0.9..=1.1).contains(&mean), "mean square {mean}");
}

#[test]
fn p1_rows_have_unit_mean_square() {
    let d = 50;
    let c = PolyOdeCoeffs::sample(d, 2, 8);
    let mean = c.p1.iter().map(|v| v * v).sum::<f64>() / d as f64;
    assert!((0.9..=1.1).contains(&mean), "{mean}");
}

#[test]
fn coefficients_depend_only_on_seed() {
    assert_eq!(
        PolyOdeCoeffs::sample(6, 3, 9),
        PolyOdeCoeffs::sample(6, 3, 9)
    );
    assert_ne!(
        PolyOdeCoeffs::sample(6, 2, 9).p2,
        PolyOdeCoeffs::sample(6, 2, 10).p2
    );
    let sys = random_poly_system(6, 2, 9);
    assert_eq!(sys.random_start(1), sys.random_start(1));
    assert_ne!(sys.random_start(1), sys.random_start(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jvp_and_vjp_are_adjoint(seed in 0u64..1000) {
        let mut r = rng(seed);
        let sys = random_poly_system(5, 3, seed);
        let y = uniform_vec(&mut r, 5, 1.0);
        let v = uniform_vec(&mut r, 5, 1.0);
        let s = uniform_vec(&mut r, 5, 1.0);
        let (mut jv, mut sj) = (vec![0.0; 5], vec![0.0; 5]);
        sys.jvp(&y, &v, &mut jv);
        sys.vjp(&y, &s, &mut sj);
        prop_assert!((dot(&s, &jv) - dot(&sj, &v)).abs() < 1e-12);
    }

    #[test]
    fn sovjp_is_symmetric_in_its_vector_argument(seed in 0u64..1000) {
        // a_m b_i F_{m,ij} c_j = a_m c_i F_{m,ij} b_j
        let mut r = rng(seed);
        let sys = p3bp();
        let mut y = uniform_vec(&mut r, 12, 1.0);
        y[2] += 3.0;
        y[4] -= 3.0;
        y[5] += 3.0;
        let (a, b, c) = (uniform_vec(&mut r, 12, 1.0), uniform_vec(&mut r, 12, 1.0), uniform_vec(&mut r, 12, 1.0));
        let (mut ab, mut ac) = (vec![0.0; 12], vec![0.0; 12]);
        sys.sovjp(&y, &a, &b, &mut ab);
        sys.sovjp(&y, &a, &c, &mut ac);
        prop_assert!((dot(&ab, &c) - dot(&ac, &b)).abs() < 1e-10);
    }
}
