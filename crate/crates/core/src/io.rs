//! JSON problem files.
//!
//! Matrices are written as arrays of rows. Floats go through `serde_json`
//! with `float_roundtrip`, so writing and re-reading a file reproduces every
//! double exactly.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::DcError;
use crate::problem::PrimalProblem;
use crate::solver::SolveConfig;

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Invalid(#[from] DcError),
}

/// Optional solver overrides carried inside a problem file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multistart_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut SolveConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        take!(
            grad_tol,
            max_iter,
            cone_margin,
            multistart_count,
            seed,
            tau_floor,
            singular_tol,
            gap_tol
        );
    }
}

/// On-disk form of a [`PrimalProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<f64>>>,
    pub alpha: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
    pub beta: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigOverrides>,
}

fn shape_err(path: impl Into<String>, message: impl Into<String>) -> ProblemFileError {
    ProblemFileError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn expect_len(path: &str, expected: usize, found: usize) -> Result<(), ProblemFileError> {
    if expected == found {
        Ok(())
    } else {
        Err(shape_err(
            path,
            format!("expected {expected} entries, found {found}"),
        ))
    }
}

fn rows_to_matrix(
    path: &str,
    n: usize,
    rows: &[Vec<f64>],
) -> Result<DMatrix<f64>, ProblemFileError> {
    expect_len(path, n, rows.len())?;
    for (i, row) in rows.iter().enumerate() {
        expect_len(&format!("{path}[{i}]"), n, row.len())?;
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ProblemFile {
    pub fn from_json_str(s: &str) -> Result<Self, ProblemFileError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            shape_err(path, e.into_inner().to_string())
        })
    }

    pub fn read(path: &Path) -> Result<Self, ProblemFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProblemFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn from_problem(prob: &PrimalProblem) -> Self {
        Self {
            n: prob.n(),
            p: prob.p(),
            r: prob.r(),
            a: prob.a().iter().map(matrix_to_rows).collect(),
            alpha: prob.alpha().iter().copied().collect(),
            b: prob.b().iter().map(matrix_to_rows).collect(),
            beta: prob.beta().iter().copied().collect(),
            c: matrix_to_rows(prob.c()),
            f: prob.f().iter().copied().collect(),
            config: None,
        }
    }

    /// Checks every array shape against `n`, `p`, `r`, then validates the
    /// instance itself.
    pub fn to_problem(&self) -> Result<PrimalProblem, ProblemFileError> {
        let (n, p, r) = (self.n, self.p, self.r);
        if n == 0 {
            return Err(shape_err("n", "must be positive"));
        }
        expect_len("A", p, self.a.len())?;
        expect_len("alpha", p, self.alpha.len())?;
        expect_len("B", r, self.b.len())?;
        expect_len("beta", r, self.beta.len())?;
        expect_len("f", n, self.f.len())?;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(i, m)| rows_to_matrix(&format!("A[{i}]"), n, m))
            .collect::<Result<Vec<_>, _>>()?;
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(j, m)| rows_to_matrix(&format!("B[{j}]"), n, m))
            .collect::<Result<Vec<_>, _>>()?;
        let c = rows_to_matrix("C", n, &self.c)?;
        Ok(PrimalProblem::new(
            a,
            self.alpha.clone(),
            b,
            self.beta.clone(),
            c,
            self.f.clone(),
        )?)
    }

    /// Default configuration with this file's overrides applied.
    pub fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        if let Some(o) = &self.config {
            o.apply(&mut cfg);
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_parse() {
        for k in 1..=4 {
            let file = ProblemFile::from_json_str(fixtures::example_json(k)).unwrap();
            let prob = file.to_problem().unwrap();
            assert_eq!((prob.n(), prob.p(), prob.r()), (2, 1, 1));
        }
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let bad = fixtures::example_json(1).replace("\"alpha\": [1.0]", "\"alpha\": [\"x\"]");
        match ProblemFile::from_json_str(&bad) {
            Err(ProblemFileError::Schema { path, .. }) => assert_eq!(path, "alpha[0]"),
            other => panic!("unexpected {other:?}"),
        }

        let bad = fixtures::example_json(1).replace("[0.0, 3.0]", "[0.0, 3.0, 1.0]");
        match ProblemFile::from_json_str(&bad).unwrap().to_problem() {
            Err(ProblemFileError::Schema { path, .. }) => assert_eq!(path, "B[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_spd_b_names_matrix() {
        let bad = fixtures::example_json(1)
            .replace("[[[0.5, 0.0], [0.0, 3.0]]]", "[[[0.5, 0.0], [0.0, -3.0]]]");
        let err = ProblemFile::from_json_str(&bad)
            .unwrap()
            .to_problem()
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("B[0]") && msg.contains("-3"), "{msg}");
    }

    #[test]
    fn overrides_apply() {
        let text = fixtures::example_json(1).replace(
            "\"n\": 2,",
            "\"n\": 2, \"config\": {\"seed\": 9, \"multistart_count\": 5},",
        );
        let file = ProblemFile::from_json_str(&text).unwrap();
        let cfg = file.solve_config();
        assert_eq!((cfg.seed, cfg.multistart_count), (9, 5));
        assert_eq!(cfg.grad_tol, SolveConfig::default().grad_tol);
    }
}
