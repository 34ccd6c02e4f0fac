//! Grid oracle against the known solutions of the bundled examples.

use dcdual_core::{
    brute_force_min, cross_check, fixtures, maximize_dual_on_sa_plus, GridSpec, SolveConfig,
};

fn grid() -> GridSpec {
    GridSpec::cube(2, -5.0, 5.0, 201).unwrap()
}

fn has_min(res: &dcdual_core::BruteForceResult, value: f64, near: [f64; 2]) -> bool {
    res.local_minima.iter().any(|m| {
        (m.value - value).abs() <= 1e-3
            && (m.x[0] - near[0]).abs() <= 1e-2
            && (m.x[1] - near[1]).abs() <= 1e-2
    })
}

#[test]
fn global_and_local_minima() {
    let cases = [
        (
            2,
            -17.1934,
            [0.315066, 3.3177],
            -4.78671,
            [0.534285, -2.83131],
        ),
        (
            3,
            -13.6736,
            [0.867833, 2.72044],
            -3.98411,
            [1.29672, -2.09209],
        ),
        (
            4,
            -22.6111,
            [2.05695, 3.01812],
            -12.7833,
            [-1.84496, -2.89962],
        ),
    ];
    for (k, global, gx, local, lx) in cases {
        let res = brute_force_min(&fixtures::example(k), &grid()).unwrap();
        assert!(
            (res.value - global).abs() <= 1e-3,
            "example {k}: {}",
            res.value
        );
        assert!(
            (res.x[0] - gx[0]).abs() <= 1e-2 && (res.x[1] - gx[1]).abs() <= 1e-2,
            "example {k}: {:?}",
            res.x
        );
        assert!(
            has_min(&res, local, lx),
            "example {k}: {:?}",
            res.local_minima
        );
        assert_eq!(res.grid_evaluations, 201 * 201);
    }
}

#[test]
fn cross_check_passes_on_every_example() {
    for k in 1..=4 {
        let c = cross_check(&fixtures::example(k), &SolveConfig::default(), &grid()).unwrap();
        assert!(
            c.pass,
            "example {k}: value diff {}, x diff {}",
            c.value_diff, c.x_diff
        );
        assert!(!c.value_only);
    }
}

#[test]
fn no_local_minimum_below_min_max_value() {
    for k in 1..=4 {
        let prob = fixtures::example(k);
        let dual = maximize_dual_on_sa_plus(&prob, &SolveConfig::default()).unwrap();
        let res = brute_force_min(&prob, &grid()).unwrap();
        for m in &res.local_minima {
            assert!(
                m.value >= dual.primal_value - 1e-9,
                "example {k}: {} < {}",
                m.value,
                dual.primal_value
            );
        }
    }
}

#[test]
fn rejects_four_dimensions() {
    assert!(GridSpec::cube(4, -1.0, 1.0, 5).is_ok());
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let prob = dcdual_core::random::random_instance(&mut rng, 4, 1, 1);
    assert!(brute_force_min(&prob, &GridSpec::cube(4, -1.0, 1.0, 5).unwrap()).is_err());
}
