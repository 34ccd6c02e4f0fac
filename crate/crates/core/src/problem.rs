//! Problem instance and primal-side quantities.
//!
//! The objective is
//!
//! ```text
//! Π(x) = Σᵢ exp(½xᵀAᵢx − αᵢ) + Σⱼ ½(½xᵀBⱼx − βⱼ)² − ½xᵀCx − fᵀx
//! ```
//!
//! written as `V(Λ(x)) − Q(x)` with the quadratic canonical measure
//! `Λ(x) = (θ, η)`, `θᵢ = ½xᵀAᵢx`, `ηⱼ = ½xᵀBⱼx`, the convex canonical function
//! `V(θ, η) = Σ exp(θᵢ − αᵢ) + Σ ½(ηⱼ − βⱼ)²` and `Q(x) = ½xᵀCx + fᵀx`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dual::SpectralBounds;
use crate::error::{DcError, Result};
use crate::linalg::{sym_eigenvalues, symmetrize};

/// Inputs whose relative asymmetry exceeds this are rejected; anything below
/// is symmetrized as `(M + Mᵀ)/2`.
pub const SYMMETRY_REJECT_TOL: f64 = 1e-8;

/// Largest exponent accepted before `exp` is declared non-finite.
pub const EXP_OVERFLOW_LIMIT: f64 = 700.0;

/// Full instance data `(Aᵢ, αᵢ, Bⱼ, βⱼ, C, f)`.
#[derive(Debug, Clone)]
pub struct PrimalProblem {
    n: usize,
    a: Vec<DMatrix<f64>>,
    alpha: DVector<f64>,
    b: Vec<DMatrix<f64>>,
    beta: DVector<f64>,
    c: DMatrix<f64>,
    f: DVector<f64>,
    bounds: SpectralBounds,
    max_asymmetry: f64,
}

/// `ξ = Λ(x) = (θ, η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMeasure {
    pub theta: DVector<f64>,
    pub eta: DVector<f64>,
}

/// Canonical dual variable `ζ = (τ, σ)` with `τ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDualPoint")]
pub struct DualPoint {
    tau: Vec<f64>,
    sigma: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDualPoint {
    tau: Vec<f64>,
    sigma: Vec<f64>,
}

impl TryFrom<RawDualPoint> for DualPoint {
    type Error = DcError;

    fn try_from(raw: RawDualPoint) -> Result<Self> {
        DualPoint::new(raw.tau, raw.sigma)
    }
}

impl DualPoint {
    pub fn new(tau: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        for (index, &value) in tau.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DcError::NonPositiveTau { index, value });
            }
        }
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(DcError::NonFiniteInput("sigma".into()));
        }
        Ok(Self { tau, sigma })
    }

    /// Splits a stacked `(τ, σ)` vector of length `p + r`.
    pub fn from_stacked(p: usize, z: &[f64]) -> Result<Self> {
        if z.len() < p {
            return Err(DcError::DimensionMismatch {
                what: "stacked dual point".into(),
                expected: p,
                found: z.len(),
            });
        }
        Self::new(z[..p].to_vec(), z[p..].to_vec())
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.tau.len() + self.sigma.len()
    }

    /// `(τ, σ)` stacked into one vector.
    pub fn stacked(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.tau.iter().chain(&self.sigma).copied())
    }
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(DcError::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        })
    }
}

fn check_square(what: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    check_len(&format!("{what} rows"), n, m.nrows())?;
    check_len(&format!("{what} columns"), n, m.ncols())
}

fn check_finite<'a>(what: &str, mut vals: impl Iterator<Item = &'a f64>) -> Result<()> {
    if vals.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DcError::NonFiniteInput(what.into()))
    }
}

/// `exp(e)` with an explicit overflow error instead of a silent infinity.
pub(crate) fn checked_exp(index: usize, exponent: f64) -> Result<f64> {
    if exponent > EXP_OVERFLOW_LIMIT || exponent.is_nan() {
        Err(DcError::ExpOverflow { index, exponent })
    } else {
        Ok(exponent.exp())
    }
}

fn half_form(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(m * x))
}

impl PrimalProblem {
    /// Validates and symmetrizes the instance. Each `Bⱼ` and `C` must be
    /// positive definite; `p + r ≥ 1`.
    pub fn new(
        a: Vec<DMatrix<f64>>,
        alpha: Vec<f64>,
        b: Vec<DMatrix<f64>>,
        beta: Vec<f64>,
        c: DMatrix<f64>,
        f: Vec<f64>,
    ) -> Result<Self> {
        let n = f.len();
        if n == 0 {
            return Err(DcError::DimensionMismatch {
                what: "f".into(),
                expected: 1,
                found: 0,
            });
        }
        check_len("alpha", a.len(), alpha.len())?;
        check_len("beta", b.len(), beta.len())?;
        if a.is_empty() && b.is_empty() {
            return Err(DcError::NoCanonicalTerms);
        }
        check_finite("alpha", alpha.iter())?;
        check_finite("beta", beta.iter())?;
        check_finite("f", f.iter())?;

        let mut max_asymmetry = 0.0_f64;
        let mut ingest = |name: String, m: DMatrix<f64>| -> Result<DMatrix<f64>> {
            check_square(&name, &m, n)?;
            check_finite(&name, m.iter())?;
            let (s, dev) = symmetrize(&m);
            if dev > SYMMETRY_REJECT_TOL {
                return Err(DcError::NotSymmetric {
                    matrix: name,
                    deviation: dev,
                });
            }
            max_asymmetry = max_asymmetry.max(dev);
            Ok(s)
        };

        let a = a
            .into_iter()
            .enumerate()
            .map(|(i, m)| ingest(format!("A[{i}]"), m))
            .collect::<Result<Vec<_>>>()?;
        let b = b
            .into_iter()
            .enumerate()
            .map(|(j, m)| ingest(format!("B[{j}]"), m))
            .collect::<Result<Vec<_>>>()?;
        let c = ingest("C".into(), c)?;

        let lambda_min_a = a.iter().map(|m| sym_eigenvalues(m)[0]).collect();
        let mut lambda_min_b = Vec::with_capacity(b.len());
        let mut lambda_max_b = Vec::with_capacity(b.len());
        for (j, m) in b.iter().enumerate() {
            let ev = sym_eigenvalues(m);
            if !(ev[0] > 0.0) {
                return Err(DcError::NotPositiveDefinite {
                    matrix: format!("B[{j}]"),
                    eigenvalue: ev[0],
                });
            }
            lambda_min_b.push(ev[0]);
            lambda_max_b.push(ev[n - 1]);
        }
        let ev_c = sym_eigenvalues(&c);
        if !(ev_c[0] > 0.0) {
            return Err(DcError::NotPositiveDefinite {
                matrix: "C".into(),
                eigenvalue: ev_c[0],
            });
        }

        Ok(Self {
            n,
            a,
            alpha: DVector::from_vec(alpha),
            b,
            beta: DVector::from_vec(beta),
            c,
            f: DVector::from_vec(f),
            bounds: SpectralBounds {
                lambda_min_a,
                lambda_min_b,
                lambda_max_b,
                lambda_max_c: ev_c[n - 1],
            },
            max_asymmetry,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn r(&self) -> usize {
        self.b.len()
    }

    /// Dual dimension `m = p + r`.
    pub fn m(&self) -> usize {
        self.p() + self.r()
    }

    pub fn a(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn b(&self) -> &[DMatrix<f64>] {
        &self.b
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }

    /// Extreme eigenvalues cached at construction.
    pub fn bounds(&self) -> &SpectralBounds {
        &self.bounds
    }

    /// Largest relative asymmetry removed on ingestion.
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// `Aᵢ` for `i < p`, then `Bⱼ`.
    pub(crate) fn canonical_matrices(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        self.a.iter().chain(self.b.iter())
    }

    pub(crate) fn check_x(&self, x: &DVector<f64>) -> Result<()> {
        check_len("x", self.n, x.len())
    }

    pub(crate) fn check_zeta(&self, zeta: &DualPoint) -> Result<()> {
        check_len("tau", self.p(), zeta.tau.len())?;
        check_len("sigma", self.r(), zeta.sigma.len())
    }

    pub fn canonical_measure(&self, x: &DVector<f64>) -> Result<CanonicalMeasure> {
        self.check_x(x)?;
        Ok(CanonicalMeasure {
            theta: DVector::from_iterator(self.p(), self.a.iter().map(|m| half_form(m, x))),
            eta: DVector::from_iterator(self.r(), self.b.iter().map(|m| half_form(m, x))),
        })
    }

    /// Constitutive map `ζ(x) = ∇V(Λ(x))`: `τᵢ = exp(θᵢ − αᵢ)`, `σⱼ = ηⱼ − βⱼ`.
    pub fn dual_of_primal_point(&self, x: &DVector<f64>) -> Result<DualPoint> {
        let xi = self.canonical_measure(x)?;
        let tau = xi
            .theta
            .iter()
            .zip(self.alpha.iter())
            .enumerate()
            .map(|(i, (t, a))| checked_exp(i, t - a))
            .collect::<Result<Vec<_>>>()?;
        let sigma = (&xi.eta - &self.beta).iter().copied().collect();
        DualPoint::new(tau, sigma)
    }

    pub fn eval_v(&self, xi: &CanonicalMeasure) -> Result<f64> {
        check_len("theta", self.p(), xi.theta.len())?;
        check_len("eta", self.r(), xi.eta.len())?;
        let mut v = 0.0;
        for (i, (t, a)) in xi.theta.iter().zip(self.alpha.iter()).enumerate() {
            v += checked_exp(i, t - a)?;
        }
        for (e, b) in xi.eta.iter().zip(self.beta.iter()) {
            v += 0.5 * (e - b).powi(2);
        }
        Ok(v)
    }

    /// `V*(ζ) = Σ (αᵢ + ln τᵢ − 1)τᵢ + ½σᵀσ + βᵀσ`.
    pub fn eval_v_star(&self, zeta: &DualPoint) -> Result<f64> {
        self.check_zeta(zeta)?;
        let v1: f64 = zeta
            .tau
            .iter()
            .zip(self.alpha.iter())
            .map(|(t, a)| (a + t.ln() - 1.0) * t)
            .sum();
        let v2: f64 = zeta
            .sigma
            .iter()
            .zip(self.beta.iter())
            .map(|(s, b)| 0.5 * s * s + b * s)
            .sum();
        Ok(v1 + v2)
    }

    /// `Q(x) = ½xᵀCx + fᵀx`.
    pub fn eval_q(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_x(x)?;
        Ok(half_form(&self.c, x) + self.f.dot(x))
    }

    pub fn eval_primal(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_x(x)?;
        let mut v = 0.0;
        for (i, (m, a)) in self.a.iter().zip(self.alpha.iter()).enumerate() {
            v += checked_exp(i, half_form(m, x) - a)?;
        }
        for (m, b) in self.b.iter().zip(self.beta.iter()) {
            v += 0.5 * (half_form(m, x) - b).powi(2);
        }
        Ok(v - half_form(&self.c, x) - self.f.dot(x))
    }

    /// `∇Π(x) = G(ζ(x))x − f`.
    pub fn grad_primal(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let zeta = self.dual_of_primal_point(x)?;
        Ok(self.assemble_g(&zeta)? * x - &self.f)
    }

    /// `∇²Π(x) = G(ζ(x)) + Σ τᵢ(Aᵢx)(Aᵢx)ᵀ + Σ (Bⱼx)(Bⱼx)ᵀ`.
    pub fn hess_primal(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let zeta = self.dual_of_primal_point(x)?;
        let mut h = self.assemble_g(&zeta)?;
        let weights = zeta.tau.iter().copied().chain(std::iter::repeat(1.0));
        for (m, w) in self.canonical_matrices().zip(weights) {
            let v = m * x;
            h += (&v * v.transpose()) * w;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    #[test]
    fn primal_value_at_origin() {
        let p = fixtures::example(1);
        let expected = (-1.0_f64).exp() + 0.5;
        assert_abs_diff_eq!(
            p.eval_primal(&v(&[0.0, 0.0])).unwrap(),
            expected,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(expected, 0.8678794, epsilon = 1e-7);
    }

    #[test]
    fn primal_values_at_reference_points() {
        let p1 = fixtures::example(1);
        assert_abs_diff_eq!(
            p1.eval_primal(&v(&[1.42283, 0.424878])).unwrap(),
            -2.8428,
            epsilon = 1e-3
        );
        let p4 = fixtures::example(4);
        assert_abs_diff_eq!(
            p4.eval_primal(&v(&[-1.84496, -2.89962])).unwrap(),
            -12.7833,
            epsilon = 1e-3
        );
    }

    #[test]
    fn canonical_measure_by_hand() {
        let p1 = fixtures::example(1);
        let xi = p1.canonical_measure(&v(&[0.0, 0.0])).unwrap();
        assert_eq!((xi.theta[0], xi.eta[0]), (0.0, 0.0));
        let xi = p1.canonical_measure(&v(&[1.0, 1.0])).unwrap();
        assert_eq!((xi.theta[0], xi.eta[0]), (1.75, 1.75));
        let p2 = fixtures::example(2);
        let xi = p2.canonical_measure(&v(&[2.0, 2.0])).unwrap();
        assert_eq!((xi.theta[0], xi.eta[0]), (2.0, 6.0));
    }

    #[test]
    fn constitutive_map() {
        let p1 = fixtures::example(1);
        let z = p1.dual_of_primal_point(&v(&[0.0, 0.0])).unwrap();
        assert_eq!(z.tau(), &[(-1.0_f64).exp()]);
        assert_eq!(z.sigma(), &[-1.0]);

        // θ = α = 1 and η = β = 1: x = (x1, x2) with 0.75x1² + x2² = 1 and
        // 0.25x1² + 1.5x2² = 1  ⇒  x1² = x2² = 4/7.
        let x = v(&[(4.0_f64 / 7.0).sqrt(), (4.0_f64 / 7.0).sqrt()]);
        let z = p1.dual_of_primal_point(&x).unwrap();
        assert_abs_diff_eq!(z.tau()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z.sigma()[0], 0.0, epsilon = 1e-14);

        let z = p1.dual_of_primal_point(&v(&[1.42283, 0.424878])).unwrap();
        assert_abs_diff_eq!(z.tau()[0], 2.01147, epsilon = 1e-4);
        assert_abs_diff_eq!(z.sigma()[0], -0.223104, epsilon = 1e-4);
    }

    #[test]
    fn conjugate_values() {
        let p1 = fixtures::example(1);
        let z = DualPoint::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(p1.eval_v_star(&z).unwrap(), 0.0);
        let p3 = fixtures::example(3);
        let z = DualPoint::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(p3.eval_v_star(&z).unwrap(), -5.0);
    }

    #[test]
    fn gradient_at_origin_is_minus_f() {
        let p1 = fixtures::example(1);
        assert_eq!(p1.grad_primal(&v(&[0.0, 0.0])).unwrap(), v(&[-2.0, -1.0]));
        let g = p1.grad_primal(&v(&[1.42283, 0.424878])).unwrap();
        assert!(g.amax() < 1e-3, "{g}");
    }

    #[test]
    fn hessian_at_origin_is_g() {
        let p1 = fixtures::example(1);
        let h = p1.hess_primal(&v(&[0.0, 0.0])).unwrap();
        let e = (-1.0_f64).exp();
        assert_abs_diff_eq!(h[(0, 0)], 1.5 * e - 0.5 - 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)], 2.0 * e - 3.0 - 1.0, epsilon = 1e-15);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn hessian_psd_at_global_minimizer() {
        let p2 = fixtures::example(2);
        let h = p2.hess_primal(&v(&[0.315066, 3.3177])).unwrap();
        assert!(sym_eigenvalues(&h)[0] >= 0.0);
    }

    #[test]
    fn rejects_bad_instances() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        let err = PrimalProblem::new(
            vec![],
            vec![],
            vec![neg],
            vec![1.0],
            eye.clone(),
            vec![1.0, 1.0],
        )
        .unwrap_err();
        assert_eq!(
            err,
            DcError::NotPositiveDefinite {
                matrix: "B[0]".into(),
                eigenvalue: -0.5
            }
        );
        assert_eq!(
            PrimalProblem::new(vec![], vec![], vec![], vec![], eye.clone(), vec![1.0, 1.0])
                .unwrap_err(),
            DcError::NoCanonicalTerms
        );
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            PrimalProblem::new(
                vec![skew],
                vec![0.0],
                vec![],
                vec![],
                eye.clone(),
                vec![1.0, 1.0]
            ),
            Err(DcError::NotSymmetric { .. })
        ));
        assert!(matches!(
            PrimalProblem::new(
                vec![eye.clone()],
                vec![0.0],
                vec![],
                vec![],
                eye.clone(),
                vec![1.0]
            ),
            Err(DcError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            DualPoint::new(vec![0.0], vec![]),
            Err(DcError::NonPositiveTau { index: 0, .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1e-10, 0.0, 1.0]);
        let p =
            PrimalProblem::new(vec![a], vec![0.0], vec![], vec![], eye, vec![1.0, 1.0]).unwrap();
        assert_eq!(p.a()[0][(0, 1)], p.a()[0][(1, 0)]);
        assert!(p.max_asymmetry() > 0.0);
    }

    #[test]
    fn exp_overflow_is_an_error() {
        let p1 = fixtures::example(1);
        let x = v(&[40.0, 40.0]);
        assert!(matches!(
            p1.eval_primal(&x),
            Err(DcError::ExpOverflow { .. })
        ));
        assert!(matches!(
            p1.dual_of_primal_point(&x),
            Err(DcError::ExpOverflow { .. })
        ));
    }
}
