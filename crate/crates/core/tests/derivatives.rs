//! Analytic derivatives against central differences at random points of
//! each bundled example.

use dcdual_core::linalg::sym_eigenvalues;
use dcdual_core::oracle::{finite_diff_gradient, finite_diff_hessian};
use dcdual_core::{fixtures, DualPoint, PrimalProblem};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 20;
const GRAD_RTOL: f64 = 1e-6;
const HESS_RTOL: f64 = 1e-4;

fn grad_step(x: &DVector<f64>) -> f64 {
    1e-6 * (1.0 + x.norm())
}

// Second differences of values lose eps/h² to rounding, so they need a wider step.
fn hess_step(x: &DVector<f64>) -> f64 {
    1e-5 * (1.0 + x.norm())
}

fn rel_err_vec(fd: &DVector<f64>, exact: &DVector<f64>) -> f64 {
    (fd - exact).amax() / exact.amax().max(1.0)
}

fn rel_err_mat(fd: &DMatrix<f64>, exact: &DMatrix<f64>) -> f64 {
    (fd - exact).amax() / exact.amax().max(1.0)
}

fn primal_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<DVector<f64>> {
    (0..POINTS)
        .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0)))
        .collect()
}

/// Points where `G(ζ)` is comfortably invertible.
fn dual_points(rng: &mut ChaCha8Rng, prob: &PrimalProblem) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    while out.len() < POINTS {
        let tau: Vec<f64> = (0..prob.p())
            .map(|_| 10f64.powf(rng.random_range(-1.3..0.7)))
            .collect();
        let sigma: Vec<f64> = (0..prob.r()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let z = DualPoint::new(tau, sigma).unwrap();
        let g = prob.assemble_g(&z).unwrap();
        if sym_eigenvalues(&g).iter().all(|l| l.abs() >= 0.2) {
            out.push(z.stacked());
        }
    }
    out
}

fn dual_value(prob: &PrimalProblem, z: &DVector<f64>) -> dcdual_core::Result<f64> {
    prob.eval_dual(&DualPoint::from_stacked(prob.p(), z.as_slice())?)
}

#[test]
fn primal_gradient_and_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=4 {
        let prob = fixtures::example(k);
        for x in primal_points(&mut rng, prob.n()) {
            let f = |y: &DVector<f64>| prob.eval_primal(y);
            let g = prob.grad_primal(&x).unwrap();
            let e = rel_err_vec(&finite_diff_gradient(f, &x, grad_step(&x)).unwrap(), &g);
            assert!(
                e <= GRAD_RTOL,
                "example {k}, x = {x}: gradient rel err {e:e}"
            );

            let h = prob.hess_primal(&x).unwrap();
            let e = rel_err_mat(&finite_diff_hessian(f, &x, hess_step(&x)).unwrap(), &h);
            assert!(
                e <= HESS_RTOL,
                "example {k}, x = {x}: hessian rel err {e:e}"
            );
        }
    }
}

#[test]
fn dual_gradient_and_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 1..=4 {
        let prob = fixtures::example(k);
        for z in dual_points(&mut rng, &prob) {
            let zeta = DualPoint::from_stacked(prob.p(), z.as_slice()).unwrap();
            let f = |y: &DVector<f64>| dual_value(&prob, y);
            let g = prob.grad_dual(&zeta).unwrap();
            let e = rel_err_vec(&finite_diff_gradient(f, &z, grad_step(&z)).unwrap(), &g);
            assert!(
                e <= GRAD_RTOL,
                "example {k}, zeta = {z}: gradient rel err {e:e}"
            );

            let h = prob.hess_dual(&zeta).unwrap();
            let e = rel_err_mat(&finite_diff_hessian(f, &z, hess_step(&z)).unwrap(), &h);
            assert!(
                e <= HESS_RTOL,
                "example {k}, zeta = {z}: hessian rel err {e:e}"
            );
        }
    }
}

#[test]
fn random_instances_up_to_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let (n, p, r) = dcdual_core::random::random_shape(&mut rng, 3, 2);
        let prob = dcdual_core::random::random_instance(&mut rng, n, p, r);
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.5..1.5));
        let f = |y: &DVector<f64>| prob.eval_primal(y);
        let e = rel_err_vec(
            &finite_diff_gradient(f, &x, grad_step(&x)).unwrap(),
            &prob.grad_primal(&x).unwrap(),
        );
        assert!(e <= GRAD_RTOL, "{e:e}");
        let e = rel_err_mat(
            &finite_diff_hessian(f, &x, hess_step(&x)).unwrap(),
            &prob.hess_primal(&x).unwrap(),
        );
        assert!(e <= HESS_RTOL, "{e:e}");
    }
}
