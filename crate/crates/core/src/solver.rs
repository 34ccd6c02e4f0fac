//! Stationary points of the canonical dual and their primal counterparts.
//!
//! [`maximize_dual_on_sa_plus`] solves the concave problem
//! `max { Π^d(ζ) : G(ζ) ≻ 0 }` by damped Newton with a fraction-to-boundary
//! guard on `λ_min(G)`. When the maximizer has `Δ > 0` the recovered
//! `x̄ = G(ζ̄)⁻¹f` is the global minimizer of `Π`.
//!
//! [`find_stationary_points`] additionally runs Newton root-finding on
//! `∇Π^d = 0` from seeded random starts to collect critical points in `S_a⁻`
//! and elsewhere. Each point is classified as min-max, double-max, double-min
//! or unclassified from the definiteness of `G(ζ̄)` and `∇²Π^d(ζ̄)`.

use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{DomainClass, DualFactor};
use crate::error::{DcError, Result};
use crate::linalg::{inf_norm, sign_pattern, sym_eigenvalues, SignPattern};
use crate::problem::{DualPoint, PrimalProblem};

/// Relative eigenvalue margin used when judging Hessian definiteness.
pub const HESSIAN_SIGN_MARGIN: f64 = 1e-8;

/// Setting this environment variable to anything but `0` or the empty
/// string forces multistart and grid evaluation to run on one thread.
pub const SERIAL_ENV: &str = "DCDUAL_SERIAL";

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const START_DOUBLINGS: i32 = 60;
const MULTISTART_TAU_RANGE: (f64, f64) = (1e-3, 1e3);
const MULTISTART_SIGMA_RANGE: (f64, f64) = (-10.0, 10.0);
const DEDUP_REL_TOL: f64 = 1e-6;

pub fn serial_requested() -> bool {
    std::env::var(SERIAL_ENV)
        .map(|v| !v.is_empty() && v != "0")
        .unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Stationarity threshold on `‖∇Π^d‖∞`.
    pub grad_tol: f64,
    /// Newton step cap per run.
    pub max_iter: usize,
    /// Fraction-to-boundary parameter: a step must keep
    /// `λ_min(G) ≥ (1 − cone_margin)·λ_min(G_current)`.
    pub cone_margin: f64,
    pub multistart_count: usize,
    pub seed: u64,
    /// Lower clamp keeping `τ > 0`.
    pub tau_floor: f64,
    pub singular_tol: f64,
    pub gap_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 200,
            cone_margin: 0.95,
            multistart_count: 64,
            seed: 0,
            tau_floor: 1e-12,
            singular_tol: 1e-10,
            gap_tol: 1e-6,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("tau_floor", self.tau_floor),
            ("singular_tol", self.singular_tol),
            ("gap_tol", self.gap_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DcError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.cone_margin > 0.0 && self.cone_margin < 1.0) {
            return Err(DcError::InvalidConfig(format!(
                "cone_margin must lie in (0, 1), got {}",
                self.cone_margin
            )));
        }
        if self.max_iter == 0 || self.multistart_count == 0 {
            return Err(DcError::InvalidConfig(
                "max_iter and multistart_count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Extremality type of a critical pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Triality {
    /// `ζ̄ ∈ S_a⁺`: `x̄` minimizes `Π` globally and `ζ̄` maximizes `Π^d` on `S_a⁺`.
    #[serde(rename = "MIN_MAX")]
    MinMax,
    /// `ζ̄ ∈ S_a⁻` with `∇²Π^d ⪯ 0`: both are local maximizers.
    #[serde(rename = "DOUBLE_MAX")]
    DoubleMax,
    /// `ζ̄ ∈ S_a⁻`, `∇²Π^d ⪰ 0` and `m = n`: both are local minimizers.
    #[serde(rename = "DOUBLE_MIN")]
    DoubleMin,
    #[serde(rename = "UNCLASSIFIED")]
    Unclassified,
}

impl Triality {
    pub fn as_str(self) -> &'static str {
        match self {
            Triality::MinMax => "MIN_MAX",
            Triality::DoubleMax => "DOUBLE_MAX",
            Triality::DoubleMin => "DOUBLE_MIN",
            Triality::Unclassified => "UNCLASSIFIED",
        }
    }
}

impl std::fmt::Display for Triality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A converged stationary pair `(x̄, ζ̄)` with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub zeta: DualPoint,
    pub x: Vec<f64>,
    pub domain: DomainClass,
    pub triality: Triality,
    pub primal_value: f64,
    pub dual_value: f64,
    pub complementary_value: f64,
    /// `|Π(x̄) − Π^d(ζ̄)|`.
    pub gap_residual: f64,
    /// Eigenvalue lower bound `Δ` at `ζ̄`.
    pub delta: f64,
    pub grad_norm_dual: f64,
    pub grad_norm_primal: f64,
    pub dual_hessian_sign: SignPattern,
    pub primal_hessian_sign: SignPattern,
    pub iterations: usize,
}

impl CriticalPointReport {
    pub fn x_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.x)
    }
}

/// Outcome of the multistart search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySet {
    pub points: Vec<CriticalPointReport>,
    /// Starts attempted, including the `S_a⁺` maximization.
    pub starts: usize,
    /// Starts that failed to converge or produced a non-finite pair.
    pub dropped: usize,
}

fn triality_of(domain: DomainClass, dual_sign: SignPattern, m: usize, n: usize) -> Triality {
    match (domain, dual_sign) {
        (DomainClass::SaPlus, _) => Triality::MinMax,
        (DomainClass::SaMinus, SignPattern::NegativeSemidefinite) => Triality::DoubleMax,
        (DomainClass::SaMinus, SignPattern::PositiveSemidefinite) if m == n => Triality::DoubleMin,
        _ => Triality::Unclassified,
    }
}

/// Triality class of a converged report, recomputed from `G(ζ̄)` and
/// `∇²Π^d(ζ̄)`. Double-min requires `m = n`; other sign patterns in `S_a⁻`
/// are left unclassified.
pub fn classify_triality(prob: &PrimalProblem, report: &CriticalPointReport) -> Result<Triality> {
    let factor = prob.dual_factor(&report.zeta)?;
    let domain = factor.domain(crate::dual::DEFAULT_SINGULAR_TOL);
    let sign = sign_pattern(&sym_eigenvalues(&factor.hessian()?), HESSIAN_SIGN_MARGIN);
    Ok(triality_of(domain, sign, prob.m(), prob.n()))
}

/// Largest pairwise difference among `Π(x̄)`, `Ξ(x̄, ζ̄)` and `Π^d(ζ̄)`.
pub fn verify_gap(prob: &PrimalProblem, report: &CriticalPointReport) -> Result<f64> {
    let x = report.x_vector();
    let primal = prob.eval_primal(&x)?;
    let comp = prob.total_complementary(&x, &report.zeta)?;
    let dual = prob.eval_dual(&report.zeta)?;
    Ok((primal - comp)
        .abs()
        .max((primal - dual).abs())
        .max((comp - dual).abs()))
}

/// `x = G(ζ)⁻¹f`.
pub fn recover_primal(prob: &PrimalProblem, zeta: &DualPoint) -> Result<DVector<f64>> {
    Ok(prob.dual_factor(zeta)?.x().clone())
}

fn build_report(
    prob: &PrimalProblem,
    factor: &DualFactor<'_>,
    cfg: &SolveConfig,
    iterations: usize,
) -> Result<CriticalPointReport> {
    let zeta = factor.zeta().clone();
    let x = factor.x().clone();
    let domain = factor.domain(cfg.singular_tol);
    let primal_value = prob.eval_primal(&x)?;
    let dual_value = factor.value();
    let complementary_value = prob.total_complementary(&x, &zeta)?;
    let dual_sign = sign_pattern(&sym_eigenvalues(&factor.hessian()?), HESSIAN_SIGN_MARGIN);
    let primal_sign = sign_pattern(
        &sym_eigenvalues(&prob.hess_primal(&x)?),
        HESSIAN_SIGN_MARGIN,
    );
    let values = [primal_value, dual_value, complementary_value];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DcError::NonFiniteInput("critical pair values".into()));
    }
    Ok(CriticalPointReport {
        delta: prob.delta_bound(prob.bounds(), &zeta)?,
        grad_norm_dual: inf_norm(&factor.gradient()),
        grad_norm_primal: inf_norm(&prob.grad_primal(&x)?),
        triality: triality_of(domain, dual_sign, prob.m(), prob.n()),
        x: x.iter().copied().collect(),
        zeta,
        domain,
        primal_value,
        dual_value,
        complementary_value,
        gap_residual: (primal_value - dual_value).abs(),
        dual_hessian_sign: dual_sign,
        primal_hessian_sign: primal_sign,
        iterations,
    })
}

fn stacked_vec(z: &DVector<f64>) -> Vec<f64> {
    z.iter().copied().collect()
}

/// `ζ + αd` if every `τ` stays at or above the floor.
fn trial_point(
    p: usize,
    z: &DVector<f64>,
    d: &DVector<f64>,
    alpha: f64,
    tau_floor: f64,
) -> Option<DualPoint> {
    let t = z + d * alpha;
    if t.iter().take(p).any(|&tau| !(tau >= tau_floor)) {
        return None;
    }
    DualPoint::from_stacked(p, t.as_slice()).ok()
}

fn is_interior(factor: &DualFactor<'_>, cfg: &SolveConfig) -> bool {
    factor.domain(cfg.singular_tol) == DomainClass::SaPlus
}

/// Point with `G(ζ) ≻ 0`: `τ = 2ᵏ·1, σ = 0` first, then `τ = 1, σ = 2ᵏ·1`.
pub fn find_interior_start(prob: &PrimalProblem, cfg: &SolveConfig) -> Result<DualPoint> {
    let (p, r) = (prob.p(), prob.r());
    let rays: [(bool, bool); 2] = [(true, false), (false, true)];
    for (grow_tau, grow_sigma) in rays {
        if (grow_tau && p == 0) || (grow_sigma && r == 0) {
            continue;
        }
        for k in 0..=START_DOUBLINGS {
            let scale = 2f64.powi(k);
            let tau = vec![if grow_tau { scale } else { 1.0 }; p];
            let sigma = vec![if grow_sigma { scale } else { 0.0 }; r];
            let zeta = DualPoint::new(tau, sigma)?;
            if let Ok(f) = DualFactor::new(prob, &zeta, cfg.singular_tol) {
                if is_interior(&f, cfg) {
                    return Ok(zeta);
                }
            }
        }
    }
    Err(DcError::NoInteriorStart)
}

/// Damped Newton ascent on `Π^d` inside `S_a⁺` from `start`.
fn newton_ascent<'a>(
    prob: &'a PrimalProblem,
    start: &DualPoint,
    cfg: &SolveConfig,
) -> Result<(DualFactor<'a>, usize)> {
    let p = prob.p();
    let mut factor = DualFactor::new(prob, start, cfg.singular_tol)?;
    let mut grad = factor.gradient();
    for it in 0..cfg.max_iter {
        let gnorm = inf_norm(&grad);
        if gnorm <= cfg.grad_tol {
            return Ok((factor, it));
        }
        let z = factor.zeta().stacked();
        let hess = factor.hessian()?;
        let mut dir = hess
            .clone()
            .lu()
            .solve(&-&grad)
            .unwrap_or_else(|| grad.clone());
        let mut slope = grad.dot(&dir);
        if !(slope > 0.0) {
            dir = grad.clone();
            slope = grad.dot(&grad);
        }
        let value = factor.value();
        let lam_floor = (1.0 - cfg.cone_margin) * factor.eigenvalues()[0];

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Some(trial) = trial_point(p, &z, &dir, alpha, cfg.tau_floor) {
                if let Ok(tf) = DualFactor::new(prob, &trial, cfg.singular_tol) {
                    if tf.eigenvalues()[0] >= lam_floor && is_interior(&tf, cfg) {
                        let tv = tf.value();
                        let tg = tf.gradient();
                        let armijo = tv >= value + ARMIJO_C * alpha * slope;
                        // Close to the maximizer the value change drowns in
                        // rounding; fall back to gradient reduction there.
                        let flat =
                            tv >= value - 1e-12 * (1.0 + value.abs()) && inf_norm(&tg) < gnorm;
                        if armijo || flat {
                            accepted = Some((tf, tg));
                            break;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((tf, tg)) => {
                factor = tf;
                grad = tg;
            }
            None => {
                return Err(DcError::LineSearchFailed {
                    zeta: stacked_vec(&z),
                    grad_norm: gnorm,
                });
            }
        }
    }
    let gnorm = inf_norm(&grad);
    if gnorm <= cfg.grad_tol {
        return Ok((factor, cfg.max_iter));
    }
    Err(DcError::MaxIterExceeded {
        iterations: cfg.max_iter,
        grad_norm: gnorm,
        zeta: stacked_vec(&factor.zeta().stacked()),
    })
}

/// Newton root-finding on `∇Π^d = 0` with backtracking on `‖∇Π^d‖₂`.
fn newton_root<'a>(
    prob: &'a PrimalProblem,
    start: &DualPoint,
    cfg: &SolveConfig,
) -> Result<(DualFactor<'a>, usize)> {
    let p = prob.p();
    let mut factor = DualFactor::new(prob, start, cfg.singular_tol)?;
    let mut grad = factor.gradient();
    for it in 0..cfg.max_iter {
        if inf_norm(&grad) <= cfg.grad_tol {
            return Ok((factor, it));
        }
        let z = factor.zeta().stacked();
        let merit = grad.norm();
        let dir =
            factor
                .hessian()?
                .lu()
                .solve(&-&grad)
                .ok_or_else(|| DcError::LineSearchFailed {
                    zeta: stacked_vec(&z),
                    grad_norm: inf_norm(&grad),
                })?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Some(trial) = trial_point(p, &z, &dir, alpha, cfg.tau_floor) {
                if let Ok(tf) = DualFactor::new(prob, &trial, cfg.singular_tol) {
                    let tg = tf.gradient();
                    if tg.norm() <= (1.0 - ARMIJO_C * alpha) * merit {
                        accepted = Some((tf, tg));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((tf, tg)) => {
                factor = tf;
                grad = tg;
            }
            None => {
                return Err(DcError::LineSearchFailed {
                    zeta: stacked_vec(&z),
                    grad_norm: inf_norm(&grad),
                });
            }
        }
    }
    if inf_norm(&grad) <= cfg.grad_tol {
        return Ok((factor, cfg.max_iter));
    }
    Err(DcError::MaxIterExceeded {
        iterations: cfg.max_iter,
        grad_norm: inf_norm(&grad),
        zeta: stacked_vec(&factor.zeta().stacked()),
    })
}

/// Maximizes `Π^d` over `S_a⁺` and returns the min-max critical pair.
///
/// Fails with [`DcError::NoInteriorStart`] when no `ζ` with `G(ζ) ≻ 0` is
/// found along the search rays. That is not a proof that `S_a⁺` is empty.
pub fn maximize_dual_on_sa_plus(
    prob: &PrimalProblem,
    cfg: &SolveConfig,
) -> Result<CriticalPointReport> {
    cfg.validate()?;
    let start = find_interior_start(prob, cfg)?;
    let (factor, iterations) = newton_ascent(prob, &start, cfg)?;
    build_report(prob, &factor, cfg, iterations)
}

/// Deterministic multistart seeds: log-uniform `τ`, uniform `σ`.
pub fn multistart_seeds(prob: &PrimalProblem, cfg: &SolveConfig) -> Vec<DualPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = (MULTISTART_TAU_RANGE.0.ln(), MULTISTART_TAU_RANGE.1.ln());
    (0..cfg.multistart_count)
        .map(|_| {
            let tau = (0..prob.p())
                .map(|_| rng.random_range(lo..hi).exp())
                .collect();
            let sigma = (0..prob.r())
                .map(|_| rng.random_range(MULTISTART_SIGMA_RANGE.0..MULTISTART_SIGMA_RANGE.1))
                .collect();
            DualPoint::new(tau, sigma).expect("seeds have positive tau")
        })
        .collect()
}

fn same_point(a: &DualPoint, b: &DualPoint) -> bool {
    let (za, zb) = (a.stacked(), b.stacked());
    (&za - &zb).norm() <= DEDUP_REL_TOL * (1.0 + za.norm().max(zb.norm()))
}

/// Collects stationary points of `Π^d` from the `S_a⁺` maximization plus
/// `cfg.multistart_count` Newton runs. Results are deduplicated by relative
/// `ζ` distance (the lower gradient norm wins) and sorted by triality class,
/// then primal value.
pub fn find_stationary_points(prob: &PrimalProblem, cfg: &SolveConfig) -> Result<StationarySet> {
    cfg.validate()?;
    let seeds = multistart_seeds(prob, cfg);
    let run = |seed: &DualPoint| -> Option<CriticalPointReport> {
        let (factor, it) = newton_root(prob, seed, cfg).ok()?;
        build_report(prob, &factor, cfg, it).ok()
    };
    let from_seeds: Vec<Option<CriticalPointReport>> = if serial_requested() {
        seeds.iter().map(run).collect()
    } else {
        seeds.par_iter().map(run).collect()
    };

    let mut candidates = Vec::with_capacity(from_seeds.len() + 1);
    candidates.push(maximize_dual_on_sa_plus(prob, cfg).ok());
    candidates.extend(from_seeds);
    let starts = candidates.len();
    let dropped = candidates.iter().filter(|c| c.is_none()).count();

    let mut points: Vec<CriticalPointReport> = Vec::new();
    for report in candidates.into_iter().flatten() {
        match points
            .iter_mut()
            .find(|k| same_point(&k.zeta, &report.zeta))
        {
            Some(kept) if report.grad_norm_dual < kept.grad_norm_dual => *kept = report,
            Some(_) => {}
            None => points.push(report),
        }
    }
    points.sort_by(|a, b| {
        a.triality
            .cmp(&b.triality)
            .then(a.primal_value.total_cmp(&b.primal_value))
    });
    Ok(StationarySet {
        points,
        starts,
        dropped,
    })
}
