//! Small dense symmetric helpers shared by the primal and dual sides.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Returns `(M + Mᵀ)/2` together with the relative asymmetry
/// `‖M − Mᵀ‖_max / ‖M‖_max` (zero for the zero matrix).
pub fn symmetrize(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let t = m.transpose();
    let scale = max_abs(m);
    let dev = max_abs(&(m - &t));
    let rel = if scale > 0.0 { dev / scale } else { 0.0 };
    ((m + t) * 0.5, rel)
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    DVector::from_vec(ev)
}

/// Spectral norm of a symmetric matrix given its sorted eigenvalues.
pub fn spectral_radius(sorted_eigs: &DVector<f64>) -> f64 {
    match (sorted_eigs.iter().next(), sorted_eigs.iter().next_back()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    }
}

/// Semidefiniteness of a symmetric matrix, judged with a relative margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignPattern {
    NegativeSemidefinite,
    PositiveSemidefinite,
    Indefinite,
}

/// Classifies sorted eigenvalues as ⪯ 0, ⪰ 0, or indefinite. The margin is
/// relative to `max(1, ‖M‖₂)`. A matrix within the margin of zero on both
/// sides is reported by the sign of its largest-magnitude eigenvalue.
pub fn sign_pattern(sorted_eigs: &DVector<f64>, margin: f64) -> SignPattern {
    let Some(&lo) = sorted_eigs.iter().next() else {
        return SignPattern::Indefinite;
    };
    let hi = sorted_eigs[sorted_eigs.len() - 1];
    let tol = margin * spectral_radius(sorted_eigs).max(1.0);
    match (hi <= tol, lo >= -tol) {
        (true, false) => SignPattern::NegativeSemidefinite,
        (false, true) => SignPattern::PositiveSemidefinite,
        (true, true) if hi.abs() >= lo.abs() => SignPattern::PositiveSemidefinite,
        (true, true) => SignPattern::NegativeSemidefinite,
        (false, false) => SignPattern::Indefinite,
    }
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
