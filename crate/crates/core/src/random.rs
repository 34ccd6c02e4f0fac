//! Seeded random instances for property tests, benches and acceptance runs.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};

use crate::problem::{DualPoint, PrimalProblem};

fn uniform_vec<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

fn symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&m + m.transpose()) * 0.5
}

/// `MᵀM + shift·I`, always positive definite.
fn spd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.transpose() * &m + DMatrix::identity(n, n) * shift
}

/// Instance with symmetric `Aᵢ` (entries in ±2), positive definite `Bⱼ` and
/// `C`, and `α, β, f` drawn uniformly. Requires `p + r ≥ 1`.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, p: usize, r: usize) -> PrimalProblem {
    assert!(n >= 1 && p + r >= 1, "need n ≥ 1 and p + r ≥ 1");
    let a = (0..p).map(|_| symmetric(rng, n, 2.0)).collect();
    let alpha = uniform_vec(rng, p, -2.0, 2.0);
    let b = (0..r).map(|_| spd(rng, n, 0.5)).collect();
    let beta = uniform_vec(rng, r, -2.0, 2.0);
    let c = spd(rng, n, 0.5);
    let f = uniform_vec(rng, n, -3.0, 3.0);
    PrimalProblem::new(a, alpha, b, beta, c, f).expect("generated data is valid")
}

/// Random shape with `n ≤ max_n`, `p, r ≤ max_pr` and `p + r ≥ 1`.
pub fn random_shape<R: Rng>(rng: &mut R, max_n: usize, max_pr: usize) -> (usize, usize, usize) {
    let n = rng.random_range(1..=max_n);
    loop {
        let p = rng.random_range(0..=max_pr);
        let r = rng.random_range(0..=max_pr);
        if p + r >= 1 {
            return (n, p, r);
        }
    }
}

/// `τ` log-uniform on `[10⁻², 10²]`, `σ` uniform on `[−5, 5]`.
pub fn random_dual_point<R: Rng>(rng: &mut R, p: usize, r: usize) -> DualPoint {
    let tau = (0..p)
        .map(|_| 10f64.powf(rng.random_range(-2.0..2.0)))
        .collect();
    DualPoint::new(tau, uniform_vec(rng, r, -5.0, 5.0)).expect("tau is positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_instance() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let p = random_instance(&mut rng, 3, 2, 1);
            (p.f().clone(), p.c().clone())
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn dual_points_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let z = random_dual_point(&mut rng, 2, 2);
            assert!(z.tau().iter().all(|&t| (0.0099..=101.0).contains(&t)));
            assert!(z.sigma().iter().all(|s| s.abs() <= 5.0));
        }
    }
}
