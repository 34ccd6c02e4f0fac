//! Independent checks that never touch the dual machinery: central finite
//! differences, and brute-force global minimization of `Π` on a grid followed
//! by Armijo gradient descent with finite-difference gradients.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};
use crate::linalg::sym_eigenvalues;
use crate::problem::{DualPoint, PrimalProblem};
use crate::solver::{maximize_dual_on_sa_plus, serial_requested, CriticalPointReport, SolveConfig};

/// Grid cells (discrete local minima, best first) that get refined.
pub const REFINE_CANDIDATES: usize = 25;
const ARMIJO_C: f64 = 1e-4;
const DESCENT_GRAD_TOL: f64 = 1e-9;
const MINIMA_MERGE_TOL: f64 = 1e-3;

/// Axis-aligned box sampled with `points_per_axis` points per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
    pub refine_steps: usize,
}

impl GridSpec {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        points_per_axis: usize,
        refine_steps: usize,
    ) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(DcError::InvalidGrid(
                "bounds must be non-empty and of equal length".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(DcError::InvalidGrid(
                "need lower < upper in every coordinate".into(),
            ));
        }
        if points_per_axis < 3 {
            return Err(DcError::InvalidGrid(
                "need at least 3 points per axis".into(),
            ));
        }
        Ok(Self {
            lower,
            upper,
            points_per_axis,
            refine_steps,
        })
    }

    /// `[lo, hi]ⁿ` with `points` per axis and 500 refinement steps.
    pub fn cube(n: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n], points, 500)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn coord(&self, axis: usize, k: usize) -> f64 {
        let t = k as f64 / (self.points_per_axis - 1) as f64;
        self.lower[axis] + (self.upper[axis] - self.lower[axis]) * t
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.points_per_axis;
            flat /= self.points_per_axis;
        }
        idx
    }

    fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.points_per_axis + k)
    }

    fn point(&self, idx: &[usize]) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            idx.iter().enumerate().map(|(a, &k)| self.coord(a, k)),
        )
    }
}

fn finite_or_err(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DcError::NonFiniteInput("finite-difference sample".into()))
    }
}

/// Central differences `(f(x + heₖ) − f(x − heₖ)) / 2h`.
pub fn finite_diff_gradient<F>(func: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    assert!(h > 0.0, "step must be positive");
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let fp = finite_or_err(func(&xp)?)?;
        xp[k] = x[k] - h;
        let fm = finite_or_err(func(&xp)?)?;
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Four-point central second differences on function values only.
pub fn finite_diff_hessian<F>(func: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    assert!(h > 0.0, "step must be positive");
    let n = x.len();
    let mut hess = DMatrix::zeros(n, n);
    let eval = |di: (usize, f64), dj: (usize, f64)| -> Result<f64> {
        let mut y = x.clone();
        y[di.0] += di.1;
        y[dj.0] += dj.1;
        finite_or_err(func(&y)?)
    };
    for i in 0..n {
        for j in i..n {
            let v = (eval((i, h), (j, h))? - eval((i, h), (j, -h))? - eval((i, -h), (j, h))?
                + eval((i, -h), (j, -h))?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMinimum {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Deduplicated descent limit points, lowest value first.
    pub local_minima: Vec<LocalMinimum>,
    pub grid_evaluations: usize,
}

fn primal_or_inf(prob: &PrimalProblem, x: &DVector<f64>) -> f64 {
    match prob.eval_primal(x) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// Armijo gradient descent with central-difference gradients.
fn descend(prob: &PrimalProblem, start: DVector<f64>, steps: usize) -> (DVector<f64>, f64) {
    let f = |y: &DVector<f64>| Ok(primal_or_inf(prob, y));
    let mut x = start;
    let mut fx = primal_or_inf(prob, &x);
    let mut alpha = 1.0_f64;
    for _ in 0..steps {
        let h = 1e-7 * (1.0 + x.amax());
        let Ok(g) = finite_diff_gradient(f, &x, h) else {
            break;
        };
        let g2 = g.norm_squared();
        if g.amax() < DESCENT_GRAD_TOL {
            break;
        }
        alpha = (alpha * 2.0).min(1.0);
        let mut moved = false;
        while alpha > 1e-16 {
            let trial = &x - &g * alpha;
            let ft = primal_or_inf(prob, &trial);
            if ft <= fx - ARMIJO_C * alpha * g2 {
                x = trial;
                fx = ft;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, fx)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Evaluates `Π` on the grid, refines the best discrete local minima by
/// gradient descent and returns the overall best point together with every
/// distinct limit point found.
pub fn brute_force_min(prob: &PrimalProblem, grid: &GridSpec) -> Result<BruteForceResult> {
    let n = prob.n();
    if n > 3 {
        return Err(DcError::OracleDimension(n));
    }
    if grid.dim() != n {
        return Err(DcError::DimensionMismatch {
            what: "grid".into(),
            expected: n,
            found: grid.dim(),
        });
    }
    let total = grid.points_per_axis.pow(n as u32);
    let eval = |flat: usize| primal_or_inf(prob, &grid.point(&grid.unravel(flat)));
    let values: Vec<f64> = if serial_requested() {
        (0..total).map(eval).collect()
    } else {
        (0..total).into_par_iter().map(eval).collect()
    };

    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|code| {
            let mut c = code;
            (0..n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect::<Vec<_>>()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|&d| d != 0))
        .collect();
    let npa = grid.points_per_axis as i64;
    let is_local_min = |flat: usize| -> bool {
        let v = values[flat];
        if !v.is_finite() {
            return false;
        }
        let idx = grid.unravel(flat);
        offsets.iter().all(|off| {
            let nb: Option<Vec<usize>> = idx
                .iter()
                .zip(off)
                .map(|(&k, &d)| {
                    let j = k as i64 + d;
                    (0..npa).contains(&j).then_some(j as usize)
                })
                .collect();
            nb.is_none_or(|nb| v <= values[grid.ravel(&nb)])
        })
    };
    let mut candidates: Vec<usize> = (0..total).filter(|&i| is_local_min(i)).collect();
    candidates.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    candidates.truncate(REFINE_CANDIDATES);

    let refine = |&flat: &usize| descend(prob, grid.point(&grid.unravel(flat)), grid.refine_steps);
    let refined: Vec<(DVector<f64>, f64)> = if serial_requested() {
        candidates.iter().map(refine).collect()
    } else {
        candidates.par_iter().map(refine).collect()
    };

    let mut minima: Vec<LocalMinimum> = Vec::new();
    for (x, value) in refined {
        if !value.is_finite() {
            continue;
        }
        let xs: Vec<f64> = x.iter().copied().collect();
        let close = |m: &LocalMinimum| {
            let d =
                m.x.iter()
                    .zip(&xs)
                    .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            d <= MINIMA_MERGE_TOL * (1.0 + x.amax())
        };
        match minima.iter_mut().find(|m| close(m)) {
            Some(m) if value < m.value => *m = LocalMinimum { x: xs, value },
            Some(_) => {}
            None => minima.push(LocalMinimum { x: xs, value }),
        }
    }
    minima.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| lex_cmp(&a.x, &b.x))
    });
    let best = minima
        .first()
        .cloned()
        .ok_or_else(|| DcError::NonFiniteInput("every grid value".into()))?;
    Ok(BruteForceResult {
        x: best.x,
        value: best.value,
        local_minima: minima,
        grid_evaluations: total,
    })
}

/// Agreement between the dual solution and the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub pass: bool,
    pub dual: CriticalPointReport,
    pub oracle: BruteForceResult,
    pub value_diff: f64,
    pub x_diff: f64,
    /// Set when several oracle minima tie in value and only values were compared.
    pub value_only: bool,
}

/// PASS iff the values agree to `1e-3·(1 + |value|)` and the points to
/// `1e-2` in the max norm. With several oracle minima tied in value (symmetric
/// instances) only the values are compared.
pub fn cross_check(prob: &PrimalProblem, cfg: &SolveConfig, grid: &GridSpec) -> Result<CrossCheck> {
    let dual = maximize_dual_on_sa_plus(prob, cfg)?;
    let oracle = brute_force_min(prob, grid)?;
    let value_tol = 1e-3 * (1.0 + oracle.value.abs());
    let value_diff = (dual.primal_value - oracle.value).abs();
    let dist = |x: &[f64]| {
        x.iter()
            .zip(&dual.x)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    };
    let x_diff = dist(&oracle.x);
    let tied: Vec<&LocalMinimum> = oracle
        .local_minima
        .iter()
        .filter(|m| (m.value - oracle.value).abs() <= value_tol)
        .collect();
    let value_ok = value_diff <= value_tol;
    let (x_ok, value_only) = if x_diff <= 1e-2 || tied.iter().any(|m| dist(&m.x) <= 1e-2) {
        (true, false)
    } else {
        (tied.len() > 1, tied.len() > 1)
    };
    Ok(CrossCheck {
        pass: value_ok && x_ok,
        dual,
        oracle,
        value_diff,
        x_diff,
        value_only,
    })
}

/// Points per suite in [`check_derivatives`].
pub const DERIVATIVE_POINTS: usize = 20;
pub const GRADIENT_RTOL: f64 = 1e-6;
pub const HESSIAN_RTOL: f64 = 1e-4;
const DUAL_SAMPLE_ATTEMPTS: usize = 100;
const DUAL_SAMPLE_MIN_EIG: f64 = 0.2;

/// Worst relative errors `‖fd − exact‖max / max(1, ‖exact‖max)` of the
/// analytic derivatives against central differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub primal_points: usize,
    pub dual_points: usize,
    pub primal_gradient: f64,
    pub primal_hessian: f64,
    pub dual_gradient: f64,
    pub dual_hessian: f64,
}

impl DerivativeCheck {
    pub fn gradients_pass(&self) -> bool {
        self.primal_gradient <= GRADIENT_RTOL && self.dual_gradient <= GRADIENT_RTOL
    }

    pub fn hessians_pass(&self) -> bool {
        self.primal_hessian <= HESSIAN_RTOL && self.dual_hessian <= HESSIAN_RTOL
    }
}

fn rel_err(fd: &DMatrix<f64>, exact: &DMatrix<f64>) -> f64 {
    (fd - exact).amax() / exact.amax().max(1.0)
}

fn as_col(v: DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    DMatrix::from_column_slice(n, 1, v.as_slice())
}

fn compare_at<F>(
    func: F,
    x: &DVector<f64>,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
) -> Result<(f64, f64)>
where
    F: Fn(&DVector<f64>) -> Result<f64> + Copy,
{
    let scale = 1.0 + x.norm();
    let fd_grad = finite_diff_gradient(func, x, 1e-6 * scale)?;
    let fd_hess = finite_diff_hessian(func, x, 1e-5 * scale)?;
    Ok((
        rel_err(&as_col(fd_grad), &as_col(grad)),
        rel_err(&fd_hess, &hess),
    ))
}

/// Compares `grad_primal`/`hess_primal` at `points` seeded uniform draws from
/// `[lo, hi]ⁿ`, and `grad_dual`/`hess_dual` at up to `points` draws of `ζ`
/// (`τ` log-uniform on `[0.05, 5]`, `σ` uniform on `[−5, 5]`) where every
/// eigenvalue of `G(ζ)` is at least 0.2 in magnitude.
pub fn check_derivatives(
    prob: &PrimalProblem,
    lo: f64,
    hi: f64,
    points: usize,
    seed: u64,
) -> Result<DerivativeCheck> {
    use rand::{RngExt, SeedableRng};
    if !(lo < hi) {
        return Err(DcError::InvalidGrid(format!(
            "empty sampling box [{lo}, {hi}]"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = DerivativeCheck {
        primal_points: 0,
        dual_points: 0,
        primal_gradient: 0.0,
        primal_hessian: 0.0,
        dual_gradient: 0.0,
        dual_hessian: 0.0,
    };

    for _ in 0..points {
        let x = DVector::from_fn(prob.n(), |_, _| rng.random_range(lo..hi));
        let (g, h) = compare_at(
            |y| prob.eval_primal(y),
            &x,
            prob.grad_primal(&x)?,
            prob.hess_primal(&x)?,
        )?;
        out.primal_gradient = out.primal_gradient.max(g);
        out.primal_hessian = out.primal_hessian.max(h);
        out.primal_points += 1;
    }

    let dual_at =
        |z: &DVector<f64>| prob.eval_dual(&DualPoint::from_stacked(prob.p(), z.as_slice())?);
    for _ in 0..points * DUAL_SAMPLE_ATTEMPTS {
        if out.dual_points == points {
            break;
        }
        let tau = (0..prob.p())
            .map(|_| 10f64.powf(rng.random_range(-1.3..0.7)))
            .collect();
        let sigma = (0..prob.r()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let zeta = DualPoint::new(tau, sigma)?;
        if sym_eigenvalues(&prob.assemble_g(&zeta)?)
            .iter()
            .any(|l| l.abs() < DUAL_SAMPLE_MIN_EIG)
        {
            continue;
        }
        let z = zeta.stacked();
        let (g, h) = compare_at(dual_at, &z, prob.grad_dual(&zeta)?, prob.hess_dual(&zeta)?)?;
        out.dual_gradient = out.dual_gradient.max(g);
        out.dual_hessian = out.dual_hessian.max(h);
        out.dual_points += 1;
    }
    Ok(out)
}
