//! `dcdual`: solve, check and plot canonical dual d.c. problems.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 unmet
//! precondition (no interior dual start, `n > 3` for `check`, surface not
//! two-dimensional for `contour`), 3 numerical failure or failed check.

mod contour;
mod fmt;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use dcdual_core::{
    check_derivatives, cross_check, find_stationary_points, maximize_dual_on_sa_plus, verify_gap,
    DcError, GridSpec, PrimalProblem, ProblemFile, ProblemFileError, SolveConfig,
};
use thiserror::Error;

use contour::{Surface, Window};
use fmt::{g6, g6_list, report_table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] ProblemFileError),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Precondition(String),

    #[error(transparent)]
    Solver(#[from] DcError),

    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Usage(_) => 1,
            CliError::Solver(DcError::InvalidConfig(_) | DcError::InvalidGrid(_)) => 1,
            CliError::Precondition(_) => 2,
            CliError::Solver(DcError::NoInteriorStart | DcError::OracleDimension(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dcdual",
    version,
    about = "Canonical dual solver for nonconvex d.c. minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find, classify and report the stationary points of a problem
    Solve(SolveArgs),
    /// Compare against a brute-force grid oracle and finite differences
    Check(CheckArgs),
    /// Write a CSV grid of the primal or dual function
    Contour(ContourArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    /// JSON file receiving the full reports
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multistart seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of multistart runs
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    grid_lo: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    grid_hi: f64,
    /// Grid points per axis
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
    /// Seed for the finite-difference sample points
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("surface").required(true).args(["primal", "dual"])))]
struct ContourArgs {
    file: PathBuf,
    /// Plot Π over x
    #[arg(long)]
    primal: bool,
    /// Plot Π^d over ζ
    #[arg(long)]
    dual: bool,
    /// lo,hi,lo,hi (defaults to the solution ± 3)
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Grid points per axis
    #[arg(long, default_value_t = 201)]
    res: usize,
    #[arg(long)]
    out: PathBuf,
}

fn load(path: &Path) -> Result<(PrimalProblem, SolveConfig), CliError> {
    let file = ProblemFile::read(path)?;
    let prob = file.to_problem()?;
    let cfg = file.solve_config();
    cfg.validate()?;
    Ok((prob, cfg))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let (prob, mut cfg) = load(&args.file)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(starts) = args.starts {
        cfg.multistart_count = starts;
    }
    cfg.validate()?;

    let min_max = maximize_dual_on_sa_plus(&prob, &cfg);
    let set = find_stationary_points(&prob, &cfg)?;
    println!("{}", report_table(&set.points));
    println!(
        "{} stationary point(s) from {} start(s), {} dropped",
        set.points.len(),
        set.starts,
        set.dropped
    );
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&set.points).expect("reports always serialize");
        write_file(out, &(json + "\n"))?;
    }
    min_max.map(|_| ()).map_err(CliError::from)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check(args: CheckArgs) -> Result<(), CliError> {
    let (prob, cfg) = load(&args.file)?;
    if prob.n() > 3 {
        return Err(DcError::OracleDimension(prob.n()).into());
    }
    let grid = GridSpec::cube(prob.n(), args.grid_lo, args.grid_hi, args.grid_n)?;
    let mut failures = 0;
    let mut report = |ok: bool, line: String| {
        failures += usize::from(!ok);
        println!("{} {line}", verdict(ok));
    };

    let cc = cross_check(&prob, &cfg, &grid)?;
    report(
        cc.pass,
        format!(
            "oracle: dual {} vs grid {} (|diff| {}, x diff {}{})",
            g6(cc.dual.primal_value),
            g6(cc.oracle.value),
            g6(cc.value_diff),
            g6(cc.x_diff),
            if cc.value_only { ", values only" } else { "" }
        ),
    );
    let floor = cc.dual.primal_value - 1e-9;
    let below = cc
        .oracle
        .local_minima
        .iter()
        .filter(|m| m.value < floor)
        .count();
    report(
        below == 0,
        format!("no oracle minimum below the min-max value ({below} found)"),
    );

    let width = args.grid_hi - args.grid_lo;
    let d = check_derivatives(
        &prob,
        args.grid_lo + 0.2 * width,
        args.grid_hi - 0.2 * width,
        dcdual_core::oracle::DERIVATIVE_POINTS,
        args.seed,
    )?;
    report(
        d.gradients_pass(),
        format!(
            "gradients: primal rel err {} ({} pts), dual rel err {} ({} pts)",
            g6(d.primal_gradient),
            d.primal_points,
            g6(d.dual_gradient),
            d.dual_points
        ),
    );
    report(
        d.hessians_pass(),
        format!(
            "hessians: primal rel err {}, dual rel err {}",
            g6(d.primal_hessian),
            g6(d.dual_hessian)
        ),
    );

    let set = find_stationary_points(&prob, &cfg)?;
    let mut worst = 0.0_f64;
    for r in &set.points {
        worst = worst.max(verify_gap(&prob, r)?);
    }
    report(
        worst <= cfg.gap_tol,
        format!(
            "zero gap: max residual {} over {} stationary pair(s)",
            g6(worst),
            set.points.len()
        ),
    );

    println!("oracle local minima:");
    for (i, m) in cc.oracle.local_minima.iter().enumerate() {
        let tag = if i == 0 { "  (global)" } else { "" };
        println!("  {} at {}{tag}", g6(m.value), g6_list(&m.x));
    }

    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failures))
    }
}

/// Center of the default window: the min-max pair, else the first stationary pair.
fn default_center(
    prob: &PrimalProblem,
    cfg: &SolveConfig,
    surface: Surface,
) -> Result<[f64; 2], CliError> {
    let report = match maximize_dual_on_sa_plus(prob, cfg) {
        Ok(r) => r,
        Err(_) => find_stationary_points(prob, cfg)?
            .points
            .into_iter()
            .next()
            .ok_or_else(|| {
                CliError::Precondition("no stationary point to center on; pass --window".into())
            })?,
    };
    let c = match surface {
        Surface::Primal => report.x,
        Surface::Dual => report.zeta.stacked().iter().copied().collect(),
    };
    Ok([c[0], c[1]])
}

fn contour(args: ContourArgs) -> Result<(), CliError> {
    let (prob, cfg) = load(&args.file)?;
    let surface = if args.primal {
        Surface::Primal
    } else {
        Surface::Dual
    };
    contour::check_plottable(&prob, surface)?;
    if args.res < 2 {
        return Err(CliError::Usage(format!(
            "--res must be at least 2, got {}",
            args.res
        )));
    }
    let window = match args.window {
        Some(w) => w,
        None => Window::around(
            default_center(&prob, &cfg, surface)?,
            contour::DEFAULT_HALF_WIDTH,
        ),
    };
    let missing = contour::write_csv(&prob, surface, window, args.res, &args.out)?;
    println!(
        "wrote {}x{} grid on [{}, {}] x [{}, {}] to {} ({missing} cell(s) {})",
        args.res,
        args.res,
        g6(window.x.0),
        g6(window.x.1),
        g6(window.y.0),
        g6(window.y.1),
        args.out.display(),
        contour::NA
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Check(a) => check(a),
        Command::Contour(a) => contour(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
