//! Batch front end for the star-network verification suites and the two
//! robustness curves. Emits CSV, schema-versioned JSON, and static SVG
//! plots; exit status 0 = success, 1 = verification/convergence failure,
//! 2 = usage or domain error.

mod svg;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ghznet_core::npa::{g_curve, GCurve, SolverOptions};
use ghznet_core::qstates::{ideal_settings, TiltAngle};
use ghznet_core::robustness::{quality_curve, QualityCurve};
use ghznet_core::starnet::{apply_gsm, build_star, evaluate_conditions, CorrelationReport};
use ghznet_core::swapiso::{ideal_gsm_effects, ideal_pairs, simulation_verify, SimulationReport};
use ghznet_core::Error as CoreError;

const PASS_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "ghznet", version, about = "Star-network self-testing verification and robustness curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ideal-realization correlation and channel-simulation suites.
    VerifyIdeal(VerifyArgs),
    /// Compute the noise-robust fidelity curve G(ε) and its threshold.
    FidelityBound(CurveArgs),
    /// Compute the measurement-quality lower bound and its threshold.
    QualityBound(QualityArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of outer parties (2..=6).
    #[arg(long)]
    n: Option<usize>,
    /// Tilt angle in radians, in (0, π/4].
    #[arg(long)]
    theta: Option<f64>,
    /// Path for the JSON report.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON config file; explicit flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// First noise value of the grid.
    #[arg(long)]
    grid_start: Option<f64>,
    /// Last noise value of the grid (inclusive, within [0, 0.2]).
    #[arg(long)]
    grid_stop: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Solver iteration cap per grid point.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Solver residual tolerance (applied to both primal and dual checks).
    #[arg(long)]
    tol: Option<f64>,
    /// Output path prefix; writes <prefix>.csv, <prefix>.json, <prefix>.svg.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON config file; explicit flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct QualityArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// CSV table of (epsilon, G) pairs, as written by fidelity-bound. When
    /// supplied the fidelity curve is read instead of recomputed.
    #[arg(long)]
    g_table: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    theta: Option<f64>,
    grid_start: Option<f64>,
    grid_stop: Option<f64>,
    grid_step: Option<f64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    output: Option<PathBuf>,
    g_table: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("invalid config {}: {e}", p.display())))
        }
    }
}

/// Failure modes carrying their contractual exit status.
struct CliError {
    status: u8,
    message: String,
}

impl CliError {
    fn usage(message: String) -> Self {
        Self { status: 2, message }
    }
    fn failed(message: String) -> Self {
        Self { status: 1, message }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let status = match e {
            CoreError::EigNoConvergence(_) | CoreError::Infeasible(_) => 1,
            _ => 2,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyIdeal(args) => cmd_verify_ideal(args),
        Command::FidelityBound(args) => cmd_fidelity_bound(args),
        Command::QualityBound(args) => cmd_quality_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.status)
        }
    }
}

#[derive(Serialize)]
struct OutcomeBlock {
    r: usize,
    probability: f64,
    correlations: CorrelationReport,
}

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    n: usize,
    theta: f64,
    outcomes: Vec<OutcomeBlock>,
    simulation: SimulationReport,
    max_deviation: f64,
    pass: bool,
}

fn cmd_verify_ideal(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(3);
    let theta_raw = args.theta.or(cfg.theta).unwrap_or(std::f64::consts::FRAC_PI_4);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("verify-ideal.json"));
    if !(2..=6).contains(&n) {
        return Err(CliError::usage(format!("n must lie in [2, 6], got {n}")));
    }
    // Snap decimal-rounded inputs like 0.7854 onto the π/4 endpoint.
    let snapped = if (theta_raw - std::f64::consts::FRAC_PI_4).abs() <= 5e-4 {
        std::f64::consts::FRAC_PI_4
    } else {
        theta_raw
    };
    let theta = TiltAngle::new(snapped)
        .map_err(|_| CliError::usage(format!("theta must lie in (0, π/4], got {theta_raw}")))?;

    let settings = ideal_settings(theta, n)?;
    let net = build_star(n, theta)?;
    let outcomes = apply_gsm(&net)?;

    let mut blocks = Vec::with_capacity(outcomes.len());
    let mut max_deviation: f64 = 0.0;
    for outcome in &outcomes {
        let state = outcome.state.as_ref().ok_or_else(|| {
            CliError::failed(format!("outcome {} has vanishing probability", outcome.r.r))
        })?;
        let report = evaluate_conditions(state, &settings, outcome.r)?;
        max_deviation = max_deviation.max(report.max_deviation);
        println!(
            "r={:0width$b} p={:.6} max_deviation={:.3e}",
            outcome.r.r,
            outcome.probability,
            report.max_deviation,
            width = n
        );
        blocks.push(OutcomeBlock {
            r: outcome.r.r,
            probability: outcome.probability,
            correlations: report,
        });
    }

    let simulation = simulation_verify(&net, &ideal_gsm_effects(theta, n)?, &ideal_pairs(&settings)?)?;
    println!(
        "channel simulation: max_distance={:.3e} max_unitality_residual={:.3e}",
        simulation.max_distance, simulation.max_unitality_residual
    );

    let pass = max_deviation <= PASS_TOL
        && simulation.max_distance <= PASS_TOL
        && simulation.max_unitality_residual <= PASS_TOL;
    let report = VerifyReport {
        schema: 1,
        n,
        theta: theta.radians(),
        outcomes: blocks,
        simulation,
        max_deviation,
        pass,
    };
    write_out(&output, &serde_json::to_string_pretty(&report).unwrap())?;
    if pass {
        println!("verify-ideal: PASS (report {})", output.display());
        Ok(())
    } else {
        Err(CliError::failed(format!(
            "verification exceeded tolerance {PASS_TOL:.0e} (report {})",
            output.display()
        )))
    }
}

fn build_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step <= 0.0 || stop < start {
        return Err(CliError::usage(format!(
            "invalid grid: start={start} stop={stop} step={step}"
        )));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| start + k as f64 * step).collect();
    if grid.iter().any(|&e| !(0.0..=0.2).contains(&e)) {
        return Err(CliError::usage(
            "grid bounds must lie within [0, 0.2]".into(),
        ));
    }
    Ok(grid)
}

/// CLI solver defaults, calibrated so a full default curve finishes in
/// minutes-per-point on one core; pass --tol / --max-iter to tighten.
fn solver_options(max_iter: Option<usize>, tol: Option<f64>) -> SolverOptions {
    let mut opts = SolverOptions {
        max_iter: 150_000,
        tol_primal: 1e-5,
        tol_dual: 1e-5,
        ..Default::default()
    };
    if let Some(m) = max_iter {
        opts.max_iter = m;
    }
    if let Some(t) = tol {
        opts.tol_primal = t;
        opts.tol_dual = t;
    }
    opts
}

#[derive(Serialize)]
struct FidelityReport<'a> {
    schema: u32,
    #[serde(flatten)]
    curve: &'a GCurve,
}

fn cmd_fidelity_bound(args: CurveArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let start = args.grid_start.or(cfg.grid_start).unwrap_or(0.0);
    let stop = args.grid_stop.or(cfg.grid_stop).unwrap_or(0.14);
    let step = args.grid_step.or(cfg.grid_step).unwrap_or(0.01);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("fidelity-bound"));
    let opts = solver_options(args.max_iter.or(cfg.max_iter), args.tol.or(cfg.tol));
    let grid = build_grid(start, stop, step)?;

    let curve = g_curve(&grid, &opts)?;
    for p in &curve.points {
        println!(
            "epsilon={:.6} G={:.9} converged={} iterations={}",
            p.epsilon, p.g, p.converged, p.iterations
        );
    }
    match curve.eps_star {
        Some(e) => println!("eps_star = {e:.6}"),
        None => println!("eps_star not bracketed by this grid"),
    }

    write_out(&output.with_extension("csv"), &curve.to_csv())?;
    let report = FidelityReport {
        schema: 1,
        curve: &curve,
    };
    write_out(
        &output.with_extension("json"),
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;
    let series: Vec<(f64, f64)> = curve.table();
    write_out(
        &output.with_extension("svg"),
        &svg::line_chart("Fidelity lower bound", "epsilon", "G", &series),
    )?;

    let stragglers: Vec<f64> = curve
        .points
        .iter()
        .filter(|p| !p.converged)
        .map(|p| p.epsilon)
        .collect();
    if stragglers.is_empty() {
        Ok(())
    } else {
        Err(CliError::failed(format!(
            "solver did not converge at epsilon {stragglers:?}"
        )))
    }
}

#[derive(Serialize)]
struct QualityReport<'a> {
    schema: u32,
    #[serde(flatten)]
    curve: &'a QualityCurve,
}

fn cmd_quality_bound(args: QualityArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.curve.config)?;
    let start = args.curve.grid_start.or(cfg.grid_start).unwrap_or(0.0);
    let stop = args.curve.grid_stop.or(cfg.grid_stop).unwrap_or(0.004);
    let step = args.curve.grid_step.or(cfg.grid_step).unwrap_or(0.0001);
    let output = args
        .curve
        .output
        .or(cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("quality-bound"));
    let g_table_path = args.g_table.or(cfg.g_table);

    let (table, unconverged) = match &g_table_path {
        Some(path) => (read_g_table(path)?, Vec::new()),
        None => {
            let opts = solver_options(
                args.curve.max_iter.or(cfg.max_iter),
                args.curve.tol.or(cfg.tol),
            );
            let grid = build_grid(start, stop, step)?;
            let g = g_curve(&grid, &opts)?;
            let unconverged: Vec<f64> = g
                .points
                .iter()
                .filter(|p| !p.converged)
                .map(|p| p.epsilon)
                .collect();
            (g.table(), unconverged)
        }
    };

    let curve = quality_curve(&table)?;
    match curve.eps_dagger {
        Some(e) => println!("eps_dagger = {e:.6}"),
        None => println!("eps_dagger not bracketed by this grid"),
    }

    write_out(&output.with_extension("csv"), &curve.to_csv())?;
    let report = QualityReport {
        schema: 1,
        curve: &curve,
    };
    write_out(
        &output.with_extension("json"),
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;
    let series: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter_map(|p| p.bound.map(|b| (p.epsilon, b)))
        .collect();
    write_out(
        &output.with_extension("svg"),
        &svg::line_chart("Measurement-quality lower bound", "epsilon", "bound", &series),
    )?;

    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::failed(format!(
            "solver did not converge at epsilon {unconverged:?}"
        )))
    }
}

/// Parse the first two columns (epsilon, G) of a fidelity-bound CSV.
fn read_g_table(path: &PathBuf) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut table = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64, CliError> {
            field
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::usage(format!("bad CSV row {} in {}", idx + 1, path.display())))
        };
        let eps = parse(cols.next())?;
        let g = parse(cols.next())?;
        table.push((eps, g));
    }
    if table.is_empty() {
        return Err(CliError::usage(format!("{} has no data rows", path.display())));
    }
    Ok(table)
}

fn write_out(path: &PathBuf, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}
