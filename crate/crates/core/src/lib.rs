//! Canonical dual solver for the nonconvex d.c. minimization problem
//!
//! ```text
//! min Π(x) = Σᵢ exp(½xᵀAᵢx − αᵢ) + Σⱼ ½(½xᵀBⱼx − βⱼ)² − ½xᵀCx − fᵀx
//! ```
//!
//! The primal is traded for the canonical dual
//! `Π^d(ζ) = −½fᵀG(ζ)⁻¹f − V*(ζ)` over `ζ = (τ, σ)`, with
//! `G(ζ) = Σ τᵢAᵢ + Σ σⱼBⱼ − C`. Every stationary `ζ̄` of `Π^d` gives a
//! stationary `x̄ = G(ζ̄)⁻¹f` of `Π` with `Π(x̄) = Π^d(ζ̄)`, and the
//! definiteness of `G(ζ̄)` and `∇²Π^d(ζ̄)` decides whether the pair is a
//! global min-max, a double-max or a double-min.
//!
//! ```
//! use dcdual_core::{fixtures, maximize_dual_on_sa_plus, SolveConfig, Triality};
//!
//! let prob = fixtures::example(1);
//! let report = maximize_dual_on_sa_plus(&prob, &SolveConfig::default()).unwrap();
//! assert_eq!(report.triality, Triality::MinMax);
//! assert!((report.primal_value - (-2.8428)).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod random;
pub mod solver;

pub use dual::{DomainClass, DualFactor, SpectralBounds};
pub use error::{DcError, Result};
pub use io::{ConfigOverrides, ProblemFile, ProblemFileError};
pub use linalg::SignPattern;
pub use oracle::{
    brute_force_min, check_derivatives, cross_check, BruteForceResult, CrossCheck, DerivativeCheck,
    GridSpec, LocalMinimum,
};
pub use problem::{CanonicalMeasure, DualPoint, PrimalProblem};
pub use solver::{
    classify_triality, find_stationary_points, maximize_dual_on_sa_plus, recover_primal,
    verify_gap, CriticalPointReport, SolveConfig, StationarySet, Triality,
};
