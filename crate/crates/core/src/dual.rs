//! Dual-side quantities: `G(ζ) = Σ τᵢAᵢ + Σ σⱼBⱼ − C`, the total
//! complementary function `Ξ`, the canonical dual `Π^d` with its first two
//! derivatives, and the spectral tests used to locate `ζ` in `S_a⁺`/`S_a⁻`.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};
use crate::linalg::{spectral_radius, sym_eigenvalues};
use crate::problem::{DualPoint, PrimalProblem};

/// Relative tolerance on `min |λ(G)|` below which `G(ζ)` counts as singular.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;

/// Smallest `τ` for which `H⁻¹ = diag(1/τ)` is formed.
pub const TAU_DOMAIN_FLOOR: f64 = 1e-300;

/// Extreme eigenvalues of the instance matrices, computed once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    pub lambda_min_a: Vec<f64>,
    pub lambda_min_b: Vec<f64>,
    pub lambda_max_b: Vec<f64>,
    pub lambda_max_c: f64,
}

/// Location of `ζ` relative to the dual feasible sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainClass {
    #[serde(rename = "SA_PLUS")]
    SaPlus,
    #[serde(rename = "SA_MINUS")]
    SaMinus,
    #[serde(rename = "INDEFINITE")]
    Indefinite,
    #[serde(rename = "SINGULAR")]
    Singular,
}

impl DomainClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainClass::SaPlus => "SA_PLUS",
            DomainClass::SaMinus => "SA_MINUS",
            DomainClass::Indefinite => "INDEFINITE",
            DomainClass::Singular => "SINGULAR",
        }
    }

    /// Classification from sorted eigenvalues of `G`, with `tol` relative to
    /// `max(1, ‖G‖₂)`.
    pub fn from_eigenvalues(sorted_eigs: &DVector<f64>, tol: f64) -> Self {
        let t = tol * spectral_radius(sorted_eigs).max(1.0);
        let lo = sorted_eigs[0];
        let hi = sorted_eigs[sorted_eigs.len() - 1];
        if lo > t {
            DomainClass::SaPlus
        } else if hi < -t {
            DomainClass::SaMinus
        } else if sorted_eigs.iter().any(|l| l.abs() <= t) {
            DomainClass::Singular
        } else {
            DomainClass::Indefinite
        }
    }
}

impl std::fmt::Display for DomainClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `G(ζ)` factored once at a nonsingular `ζ`, with `x̂ = G⁻¹f` cached.
///
/// Value, gradient and Hessian of `Π^d` all reuse the same LU factorization.
#[derive(Debug, Clone)]
pub struct DualFactor<'a> {
    prob: &'a PrimalProblem,
    zeta: DualPoint,
    g: DMatrix<f64>,
    eigs: DVector<f64>,
    lu: LU<f64, Dyn, Dyn>,
    x: DVector<f64>,
}

impl<'a> DualFactor<'a> {
    pub fn new(prob: &'a PrimalProblem, zeta: &DualPoint, singular_tol: f64) -> Result<Self> {
        let g = prob.assemble_g(zeta)?;
        let eigs = sym_eigenvalues(&g);
        let min_abs = eigs.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        if !(min_abs > singular_tol * spectral_radius(&eigs).max(1.0)) {
            return Err(DcError::SingularG {
                zeta: zeta.stacked().iter().copied().collect(),
                min_abs_eigenvalue: min_abs,
            });
        }
        let lu = g.clone().lu();
        let x = lu.solve(prob.f()).ok_or_else(|| DcError::SingularG {
            zeta: zeta.stacked().iter().copied().collect(),
            min_abs_eigenvalue: min_abs,
        })?;
        Ok(Self {
            prob,
            zeta: zeta.clone(),
            g,
            eigs,
            lu,
            x,
        })
    }

    pub fn zeta(&self) -> &DualPoint {
        &self.zeta
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Sorted eigenvalues of `G(ζ)`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigs
    }

    /// `x̂ = G(ζ)⁻¹f`.
    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn domain(&self, tol: f64) -> DomainClass {
        DomainClass::from_eigenvalues(&self.eigs, tol)
    }

    /// `Π^d(ζ) = −½fᵀG⁻¹f − V*(ζ)`.
    pub fn value(&self) -> f64 {
        -0.5 * self.prob.f().dot(&self.x)
            - self
                .prob
                .eval_v_star(&self.zeta)
                .expect("dimensions checked on construction")
    }

    /// Components `½x̂ᵀAᵢx̂ − αᵢ − ln τᵢ` followed by `½x̂ᵀBⱼx̂ − σⱼ − βⱼ`.
    pub fn gradient(&self) -> DVector<f64> {
        let p = self.prob;
        let x = &self.x;
        let tau_part = p
            .a()
            .iter()
            .zip(p.alpha().iter())
            .zip(self.zeta.tau())
            .map(|((m, a), t)| 0.5 * x.dot(&(m * x)) - a - t.ln());
        let sigma_part = p
            .b()
            .iter()
            .zip(p.beta().iter())
            .zip(self.zeta.sigma())
            .map(|((m, b), s)| 0.5 * x.dot(&(m * x)) - s - b);
        DVector::from_iterator(p.m(), tau_part.chain(sigma_part))
    }

    /// `∇²Π^d = −ZᵀG⁻¹Z − H⁻¹` with `Z = [A₁x̂ … B_r x̂]` and
    /// `H⁻¹ = blockdiag(diag(1/τ), I)`.
    pub fn hessian(&self) -> Result<DMatrix<f64>> {
        let p = self.prob;
        let m = p.m();
        for (index, &t) in self.zeta.tau().iter().enumerate() {
            if t < TAU_DOMAIN_FLOOR {
                return Err(DcError::NonPositiveTau { index, value: t });
            }
        }
        let cols: Vec<DVector<f64>> = p.canonical_matrices().map(|mat| mat * &self.x).collect();
        let z = DMatrix::from_columns(&cols);
        let w = self.lu.solve(&z).ok_or_else(|| DcError::SingularG {
            zeta: self.zeta.stacked().iter().copied().collect(),
            min_abs_eigenvalue: 0.0,
        })?;
        let mut h = -(z.transpose() * w);
        for (k, &t) in self.zeta.tau().iter().enumerate() {
            h[(k, k)] -= 1.0 / t;
        }
        for k in p.p()..m {
            h[(k, k)] -= 1.0;
        }
        Ok((&h + h.transpose()) * 0.5)
    }
}

impl PrimalProblem {
    /// `G(ζ) = Σ τᵢAᵢ + Σ σⱼBⱼ − C`.
    pub fn assemble_g(&self, zeta: &DualPoint) -> Result<DMatrix<f64>> {
        self.check_zeta(zeta)?;
        let mut g = -self.c().clone();
        let weights = zeta.tau().iter().chain(zeta.sigma());
        for (m, &w) in self.canonical_matrices().zip(weights) {
            g += m * w;
        }
        Ok(g)
    }

    /// `Ξ(x, ζ) = ½xᵀG(ζ)x − fᵀx − V*(ζ)`.
    pub fn total_complementary(&self, x: &DVector<f64>, zeta: &DualPoint) -> Result<f64> {
        self.check_x(x)?;
        let g = self.assemble_g(zeta)?;
        Ok(0.5 * x.dot(&(g * x)) - self.f().dot(x) - self.eval_v_star(zeta)?)
    }

    pub fn dual_factor(&self, zeta: &DualPoint) -> Result<DualFactor<'_>> {
        DualFactor::new(self, zeta, DEFAULT_SINGULAR_TOL)
    }

    pub fn eval_dual(&self, zeta: &DualPoint) -> Result<f64> {
        Ok(self.dual_factor(zeta)?.value())
    }

    pub fn grad_dual(&self, zeta: &DualPoint) -> Result<DVector<f64>> {
        Ok(self.dual_factor(zeta)?.gradient())
    }

    pub fn hess_dual(&self, zeta: &DualPoint) -> Result<DMatrix<f64>> {
        self.dual_factor(zeta)?.hessian()
    }

    pub fn classify_domain(&self, zeta: &DualPoint, tol: f64) -> Result<DomainClass> {
        let g = self.assemble_g(zeta)?;
        Ok(DomainClass::from_eigenvalues(&sym_eigenvalues(&g), tol))
    }

    /// `Δ = Σ τᵢλ_min(Aᵢ) + Σ σⱼλ̄(Bⱼ) − λ_max(C)` where `λ̄(Bⱼ)` is
    /// `λ_min(Bⱼ)` for `σⱼ > 0` and `λ_max(Bⱼ)` otherwise. Every eigenvalue
    /// of `G(ζ)` is at least `Δ`.
    pub fn delta_bound(&self, bounds: &SpectralBounds, zeta: &DualPoint) -> Result<f64> {
        self.check_zeta(zeta)?;
        let a_part: f64 = zeta
            .tau()
            .iter()
            .zip(&bounds.lambda_min_a)
            .map(|(t, l)| t * l)
            .sum();
        let b_part: f64 = zeta
            .sigma()
            .iter()
            .zip(bounds.lambda_min_b.iter().zip(&bounds.lambda_max_b))
            .map(|(&s, (&lo, &hi))| s * if s > 0.0 { lo } else { hi })
            .sum();
        Ok(a_part + b_part - bounds.lambda_max_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn zeta(t: f64, s: f64) -> DualPoint {
        DualPoint::new(vec![t], vec![s]).unwrap()
    }

    #[test]
    fn g_by_hand() {
        let p1 = fixtures::example(1);
        let g = p1.assemble_g(&zeta(2.01147, -0.223104)).unwrap();
        assert_abs_diff_eq!(
            g[(0, 0)],
            1.5 * 2.01147 + 0.5 * -0.223104 - 1.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(g[(0, 0)], 1.40562, epsilon = 1e-4);
        assert_abs_diff_eq!(g[(1, 1)], 2.35363, epsilon = 1e-4);
        assert_eq!(g[(0, 1)], 0.0);

        let g = p1.assemble_g(&zeta(1.0, 0.0)).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(
            p1.classify_domain(&zeta(1.0, 0.0), 1e-10).unwrap(),
            DomainClass::Singular
        );
        assert!(matches!(
            p1.eval_dual(&zeta(1.0, 0.0)),
            Err(DcError::SingularG { .. })
        ));

        assert_eq!(
            p1.classify_domain(&zeta(1e6, 0.0), 1e-10).unwrap(),
            DomainClass::SaPlus
        );
    }

    #[test]
    fn complementary_vanishes_at_origin() {
        let p1 = fixtures::example(1);
        let x = DVector::zeros(2);
        assert_eq!(p1.total_complementary(&x, &zeta(1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn reference_dual_values() {
        let cases = [
            (1, 2.01147, -0.223104, -2.8428),
            (4, 0.0612941, 4.67004, -22.6111),
            (3, 54.3685, -0.492123, 54.9641),
            (2, 0.151452, -1.68381, 2.98579),
        ];
        for (k, t, s, v) in cases {
            let val = fixtures::example(k).eval_dual(&zeta(t, s)).unwrap();
            assert_abs_diff_eq!(val, v, epsilon = 1e-3);
        }
        let p1 = fixtures::example(1);
        let x = DVector::from_row_slice(&[1.42283, 0.424878]);
        let xi = p1
            .total_complementary(&x, &zeta(2.01147, -0.223104))
            .unwrap();
        assert_abs_diff_eq!(xi, -2.8428, epsilon = 1e-3);
    }

    #[test]
    fn reference_points_are_stationary() {
        for (k, t, s) in [(1, 2.01147, -0.223104), (2, 0.142222, 3.60283)] {
            let g = fixtures::example(k).grad_dual(&zeta(t, s)).unwrap();
            assert!(g.amax() < 1e-3, "example {k}: {g}");
        }
    }

    #[test]
    fn dual_hessian_signs() {
        let p1 = fixtures::example(1);
        let h = p1.hess_dual(&zeta(2.01147, -0.223104)).unwrap();
        assert!(sym_eigenvalues(&h)[1] < 0.0);
        let p4 = fixtures::example(4);
        let h = p4.hess_dual(&zeta(0.149286, 3.90584)).unwrap();
        assert!(sym_eigenvalues(&h)[0] >= 0.0);
    }

    #[test]
    fn domain_of_reference_points() {
        let p1 = fixtures::example(1);
        assert_eq!(
            p1.classify_domain(&zeta(2.01147, -0.223104), 1e-10)
                .unwrap(),
            DomainClass::SaPlus
        );
        let p2 = fixtures::example(2);
        assert_eq!(
            p2.classify_domain(&zeta(0.151452, -1.68381), 1e-10)
                .unwrap(),
            DomainClass::SaMinus
        );
        let p4 = fixtures::example(4);
        assert_eq!(
            p4.classify_domain(&zeta(0.31913573, 4.40469459), 1e-10)
                .unwrap(),
            DomainClass::Indefinite
        );
    }

    #[test]
    fn reference_delta_values() {
        let p1 = fixtures::example(1);
        let d = p1
            .delta_bound(p1.bounds(), &zeta(2.01147, -0.223104))
            .unwrap();
        assert_abs_diff_eq!(d, 0.8479, epsilon = 1e-3);
        let p4 = fixtures::example(4);
        let d = p4
            .delta_bound(p4.bounds(), &zeta(0.0612941, 4.67004))
            .unwrap();
        assert_abs_diff_eq!(d, 0.0862, epsilon = 1e-3);
    }

    #[test]
    fn domain_serializes_as_tag() {
        assert_eq!(
            serde_json::to_string(&DomainClass::SaMinus).unwrap(),
            "\"SA_MINUS\""
        );
    }
}
