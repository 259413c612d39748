//! Command-line front end: computes weak values and their decompositions,
//! verifies the analytical inequalities over randomized corpora, runs the
//! exact pointer simulation, and sweeps post-selections along geodesic paths.
//!
//! Exit codes: 0 success, 2 validation failure (bad input, broken invariant
//! in a problem file), 3 a verified inequality was found violated.

mod fuzz;
mod problem;
mod scan;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use weakval::hilbert::expectation;
use weakval::meter::{evolve_and_postselect, first_order_checks, MeterConfig};
use weakval::weakvalue::{
    anomaly_bounds, decompose_weak_value, identity_resolution_average, phase_analysis,
    tradeoff_check, weak_value,
};

use problem::Problem;

#[derive(Debug)]
pub enum AppError {
    /// Unusable input: parse failures and violated construction invariants.
    Validation(String),
    /// A checked inequality or convergence assertion failed.
    Inequality(String),
    Internal(String),
}

impl AppError {
    fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::Inequality(m) | AppError::Internal(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Inequality(_) => 3,
            AppError::Internal(_) => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "weakval",
    version,
    about = "Weak values: computation, bounds, verification and pointer simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem description file (JSON).
    input: std::path::PathBuf,
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Minimum |⟨φ|ψ⟩| accepted when building the ensemble.
    #[arg(long)]
    overlap_threshold: Option<f64>,
}

#[derive(Args)]
struct MeterArgs {
    /// Coupling strength (overrides the problem file).
    #[arg(long)]
    g: Option<f64>,
    /// Grid points (power of two).
    #[arg(long)]
    n_grid: Option<usize>,
    /// Grid half width L.
    #[arg(long)]
    half_width: Option<f64>,
    /// Gaussian envelope width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Initial momentum offset.
    #[arg(long)]
    k0: Option<f64>,
    /// Initial position offset.
    #[arg(long)]
    x0: Option<f64>,
}

impl MeterArgs {
    fn apply(&self, mut cfg: MeterConfig) -> MeterConfig {
        if let Some(v) = self.n_grid {
            cfg.n_grid = v;
        }
        if let Some(v) = self.half_width {
            cfg.half_width = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.k0 {
            cfg.k0 = v;
        }
        if let Some(v) = self.x0 {
            cfg.x0 = v;
        }
        cfg
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    meter: MeterArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Weak value ⟨φ|A|ψ⟩/⟨φ|ψ⟩ with the plain average for contrast.
    Compute(ProblemArgs),
    /// Split the weak value into average + anomalous part, with phases.
    Decompose(ProblemArgs),
    /// Two-sided bound on the anomalous part and the top-eigenvalue gap.
    Bounds(ProblemArgs),
    /// Anomaly-product tradeoff for two non-commuting observables.
    Tradeoff(ProblemArgs),
    /// Expand ⟨A⟩ over a complete set of intermediate post-selections.
    Average(ProblemArgs),
    /// Exact pointer simulation at one coupling strength.
    Simulate(SimArgs),
    /// First-order residual convergence under coupling halving.
    Converge(SimArgs),
    /// Sweep the post-selection along a great-circle path (CSV).
    Scan(ScanCmd),
    /// Randomized verification of every identity and inequality.
    Fuzz(FuzzCmd),
}

#[derive(Args)]
struct ScanCmd {
    /// Problem description file (JSON) with a "scan" section.
    input: std::path::PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    overlap_threshold: Option<f64>,
}

#[derive(Args)]
struct FuzzCmd {
    /// Number of random trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Inclusive dimension range, e.g. 2..8.
    #[arg(long, default_value = "2..8", value_parser = parse_dims)]
    dims: (usize, usize),
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI (inclusive), got '{s}'"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound: {e}"))?;
    if lo < 2 || hi < lo {
        return Err(format!("need 2 <= LO <= HI, got {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> AppResult<()> {
    match command {
        Command::Compute(args) => cmd_compute(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Tradeoff(args) => cmd_tradeoff(args),
        Command::Average(args) => cmd_average(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Scan(args) => scan::run(&args.input, args.overlap_threshold, args.format),
        Command::Fuzz(args) => fuzz::run(args.trials, args.dims, args.seed),
    }
}

fn json_out(value: &serde_json::Value) {
    println!("{value}");
}

fn csv_row(header: &str, values: &[f64]) {
    println!("{header}");
    let row: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    println!("{}", row.join(","));
}

fn cmd_compute(args: ProblemArgs) -> AppResult<()> {
    let p = Problem::load(&args.input)?;
    let a = p.observable_a()?;
    let e = p.ensemble(args.overlap_threshold)?;
    let wv = weak_value(&a, &e).map_err(problem::computation_error)?;
    let average = expectation(&a, e.pre()).map_err(problem::computation_error)?;
    let o = e.overlap();
    match args.format {
        OutputFormat::Json => json_out(&json!({
            "weak_value": [wv.re, wv.im],
            "average": average,
            "overlap": [o.re, o.im],
        })),
        OutputFormat::Csv => csv_row(
            "weak_re,weak_im,average,overlap_abs",
            &[wv.re, wv.im, average, o.norm()],
        ),
    }
    Ok(())
}

fn cmd_decompose(args: ProblemArgs) -> AppResult<()> {
    if args.format == OutputFormat::Csv {
        return Err(AppError::Validation(
            "decompose reports are nested; csv output is not available, use --format json".into(),
        ));
    }
    let p = Problem::load(&args.input)?;
    let a = p.observable_a()?;
    let e = p.ensemble(args.overlap_threshold)?;
    let report = decompose_weak_value(&a, &e).map_err(problem::computation_error)?;
    let phase = phase_analysis(&report).ok();
    let mut doc = serde_json::to_value(&report)
        .map_err(|e| AppError::Internal(format!("serialization failed: {e}")))?;
    doc.as_object_mut().expect("report is an object").insert(
        "phase".into(),
        phase
            .map(|p| serde_json::to_value(p).expect("phase analysis serializes"))
            .unwrap_or(serde_json::Value::Null),
    );
    json_out(&doc);
    Ok(())
}

fn cmd_bounds(args: ProblemArgs) -> AppResult<()> {
    let p = Problem::load(&args.input)?;
    let a = p.observable_a()?;
    let e = p.ensemble(args.overlap_threshold)?;
    let bounds = anomaly_bounds(&a, &e).map_err(problem::computation_error)?;
    match args.format {
        OutputFormat::Json => json_out(&serde_json::to_value(bounds).unwrap()),
        OutputFormat::Csv => csv_row(
            "anomaly_modulus,lower,upper,lambda_max_gap,lambda_gap_bound",
            &[
                bounds.anomaly_modulus,
                bounds.lower,
                bounds.upper,
                bounds.lambda_max_gap,
                bounds.lambda_gap_bound,
            ],
        ),
    }
    Ok(())
}

fn cmd_tradeoff(args: ProblemArgs) -> AppResult<()> {
    let p = Problem::load(&args.input)?;
    let a = p.observable_a()?;
    let b = p.observable_b()?;
    let e = p.ensemble(args.overlap_threshold)?;
    let t = tradeoff_check(&a, &b, &e).map_err(problem::computation_error)?;
    match args.format {
        OutputFormat::Json => json_out(&serde_json::to_value(t).unwrap()),
        OutputFormat::Csv => {
            println!("lhs,rhs,satisfied");
            println!("{},{},{}", t.lhs, t.rhs, t.satisfied);
        }
    }
    if !t.satisfied {
        return Err(AppError::Inequality(format!(
            "tradeoff violated: lhs {} < rhs {}",
            t.lhs, t.rhs
        )));
    }
    Ok(())
}

fn cmd_average(args: ProblemArgs) -> AppResult<()> {
    if args.format == OutputFormat::Csv {
        return Err(AppError::Validation(
            "average reports are nested; csv output is not available, use --format json".into(),
        ));
    }
    let p = Problem::load(&args.input)?;
    let a = p.observable_a()?;
    let psi = p.pre_state()?;
    let basis = p.basis_or_eigenbasis(&a)?;
    let res = identity_resolution_average(&a, &psi, &basis).map_err(problem::computation_error)?;
    let average = expectation(&a, &psi).map_err(problem::computation_error)?;
    let mut doc = serde_json::to_value(&res).unwrap();
    doc.as_object_mut()
        .expect("resolution report is an object")
        .insert("average".into(), json!(average));
    json_out(&doc);
    Ok(())
}

fn cmd_simulate(args: SimArgs) -> AppResult<()> {
    let p = Problem::load(&args.problem.input)?;
    let a = p.observable_a()?;
    let e = p.ensemble(args.problem.overlap_threshold)?;
    let cfg = args.meter.apply(p.meter_config());
    let g = args.meter.g.or(p.coupling()).unwrap_or(0.01);
    let r = evolve_and_postselect(&a, &e, &cfg, g).map_err(problem::computation_error)?;
    match args.problem.format {
        OutputFormat::Json => json_out(&serde_json::to_value(r).unwrap()),
        OutputFormat::Csv => csv_row(
            "p_select,mean_x_before,mean_x_after,mean_m_before,mean_m_after,var_m,g",
            &[
                r.p_select,
                r.mean_x_before,
                r.mean_x_after,
                r.mean_m_before,
                r.mean_m_after,
                r.var_m,
                r.g,
            ],
        ),
    }
    Ok(())
}

fn cmd_converge(args: SimArgs) -> AppResult<()> {
    let p = Problem::load(&args.problem.input)?;
    let a = p.observable_a()?;
    let e = p.ensemble(args.problem.overlap_threshold)?;
    let cfg = args.meter.apply(p.meter_config());
    let g = args.meter.g.or(p.coupling()).unwrap_or(0.01);
    let report = first_order_checks(&a, &e, &cfg, g).map_err(problem::computation_error)?;
    match args.problem.format {
        OutputFormat::Json => json_out(&serde_json::to_value(&report).unwrap()),
        OutputFormat::Csv => print!("{}", report.to_csv()),
    }
    if !report.all_passed() {
        let failing: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == weakval::meter::CheckStatus::Failed)
            .map(|c| c.name)
            .collect();
        return Err(AppError::Inequality(format!(
            "first-order convergence failed for: {}",
            failing.join(", ")
        )));
    }
    Ok(())
}
