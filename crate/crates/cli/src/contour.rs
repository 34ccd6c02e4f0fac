//! Rectangular-grid CSV dumps of `Π` or `Π^d` for external contour plotting.

use std::path::Path;
use std::str::FromStr;

use dcdual_core::{DualPoint, PrimalProblem};
use nalgebra::DVector;

use crate::CliError;

/// Marker written where the function is not available (singular `G`, `τ ≤ 0`,
/// overflow).
pub const NA: &str = "NA";
pub const DEFAULT_HALF_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Primal,
    Dual,
}

/// `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Window {
    pub fn around(center: [f64; 2], half: f64) -> Self {
        Self {
            x: (center[0] - half, center[0] + half),
            y: (center[1] - half, center[1] + half),
        }
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad window entry `{t}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let [x0, x1, y0, y1] = v[..] else {
            return Err(format!(
                "window needs four numbers lo,hi,lo,hi; got {}",
                v.len()
            ));
        };
        if !(x0 < x1 && y0 < y1) || v.iter().any(|t| !t.is_finite()) {
            return Err(format!("window bounds must be finite with lo < hi: {s}"));
        }
        Ok(Self {
            x: (x0, x1),
            y: (y0, y1),
        })
    }
}

/// Column names of the two plotted coordinates.
pub fn axis_labels(prob: &PrimalProblem, surface: Surface) -> [&'static str; 2] {
    match (surface, prob.p()) {
        (Surface::Primal, _) => ["x", "y"],
        (Surface::Dual, 2) => ["tau1", "tau2"],
        (Surface::Dual, 1) => ["tau", "sigma"],
        (Surface::Dual, _) => ["sigma1", "sigma2"],
    }
}

/// Exit-2 precondition: the surface must have exactly two coordinates.
pub fn check_plottable(prob: &PrimalProblem, surface: Surface) -> Result<(), CliError> {
    let (dim, name) = match surface {
        Surface::Primal => (prob.n(), "primal contour needs n = 2"),
        Surface::Dual => (prob.m(), "dual contour needs p + r = 2"),
    };
    if dim == 2 {
        Ok(())
    } else {
        Err(CliError::Precondition(format!(
            "{name}, this problem has {dim}"
        )))
    }
}

fn axis(lo: f64, hi: f64, res: usize, k: usize) -> f64 {
    if k + 1 == res {
        hi
    } else {
        lo + (hi - lo) * k as f64 / (res - 1) as f64
    }
}

fn value_at(prob: &PrimalProblem, surface: Surface, u: f64, v: f64) -> Option<f64> {
    let val = match surface {
        Surface::Primal => prob.eval_primal(&DVector::from_row_slice(&[u, v])).ok()?,
        Surface::Dual => prob
            .eval_dual(&DualPoint::from_stacked(prob.p(), &[u, v]).ok()?)
            .ok()?,
    };
    val.is_finite().then_some(val)
}

/// Writes `res × res` rows, first coordinate outermost. Returns the number of
/// rows carrying the not-available marker.
pub fn write_csv(
    prob: &PrimalProblem,
    surface: Surface,
    window: Window,
    res: usize,
    out: &Path,
) -> Result<usize, CliError> {
    let io_err = |e: csv::Error| CliError::Write {
        path: out.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(out).map_err(io_err)?;
    let [a, b] = axis_labels(prob, surface);
    w.write_record([a, b, "value"]).map_err(io_err)?;
    let mut missing = 0;
    for i in 0..res {
        let u = axis(window.x.0, window.x.1, res, i);
        for j in 0..res {
            let v = axis(window.y.0, window.y.1, res, j);
            let value = match value_at(prob, surface, u, v) {
                Some(f) => f.to_string(),
                None => {
                    missing += 1;
                    NA.to_string()
                }
            };
            w.write_record([u.to_string(), v.to_string(), value])
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(|e| CliError::Write {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(missing)
}
