use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use fairalloc::packing::GuaranteeForm;
use fairalloc::trace::{write_trace_csv, TraceRow};
use fairalloc::{
    covering_residual, feasibility_report, read_matrix_market, run_distributed, solve_covering,
    solve_packing, standardize, CoveringSolution, DistributedSolution, Instance, LocalityAudit,
    Mode, PackingSolution, SolverConfig,
};

mod output;

use output::{num, nums, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Pack,
    Cover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Monolithic,
    Rounds,
}

/// Fair packing and covering solver.
///
/// Reads a nonnegative matrix in MatrixMarket coordinate format and solves
/// either the alpha-fair packing problem (rows are constraints `A x <= 1`)
/// or the beta-fair covering problem (columns are constraints `A^T y >= 1`).
#[derive(Debug, Parser)]
#[command(name = "fairalloc", version)]
struct Args {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Fairness exponent for packing (>= 0).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Fairness exponent for covering; values <= 0 select the near-linear default.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: f64,
    /// MatrixMarket coordinate file.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the JSON result; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the convergence trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "monolithic")]
    engine: Engine,
    /// Overrides the derived iteration budget.
    #[arg(long)]
    max_iters: Option<u64>,
    /// Stop once the duality gap certifies the target (packing, alpha > 1).
    #[arg(long)]
    early_stop: bool,
    /// Record a trace row every N iterations (default: budget / 1000).
    #[arg(long)]
    trace_stride: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Solver(#[from] fairalloc::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(e) if e.is_internal() => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn config(args: &Args) -> Result<SolverConfig, CliError> {
    let mut config = match args.mode {
        ModeArg::Pack => {
            if args.beta.is_some() {
                return Err(CliError::Usage(
                    "--beta is only valid with --mode cover".into(),
                ));
            }
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::Usage("--mode pack requires --alpha".into()))?;
            SolverConfig::packing(alpha, args.epsilon)?
        }
        ModeArg::Cover => {
            if args.alpha.is_some() {
                return Err(CliError::Usage(
                    "--alpha is only valid with --mode pack".into(),
                ));
            }
            let beta = args
                .beta
                .ok_or_else(|| CliError::Usage("--mode cover requires --beta".into()))?;
            SolverConfig::covering(beta, args.epsilon)?
        }
    };
    if let Some(k) = args.max_iters {
        config = config.with_max_iters(k);
    }
    if let Some(s) = args.trace_stride {
        if s == 0 {
            return Err(CliError::Usage("--trace-stride must be positive".into()));
        }
        config = config.with_trace_stride(s);
    }
    if args.early_stop {
        if args.mode != ModeArg::Pack || args.alpha.unwrap_or(0.0) <= 1.0 {
            return Err(CliError::Usage(
                "--early-stop needs --mode pack with alpha > 1".into(),
            ));
        }
        config = config.with_early_stop(true);
    }
    Ok(config)
}

fn guarantee_name(form: GuaranteeForm) -> &'static str {
    match form {
        GuaranteeForm::BelowOne => "3*eps*(1-alpha)*f",
        GuaranteeForm::Proportional => "3*eps*n",
        GuaranteeForm::AboveOne => "10*eps*(alpha-1)*|f|",
    }
}

fn packing_result(
    instance: &Instance,
    sol: &PackingSolution,
    scale: f64,
) -> Result<RunResult, CliError> {
    let raw_x: Vec<f64> = sol.x.iter().map(|v| v * scale).collect();
    let report = feasibility_report(instance, &raw_x)?;
    let p = &sol.params;
    let mut r = RunResult::new("pack");
    r.fairness = num(p.alpha);
    r.epsilon = num(p.epsilon);
    r.solution = nums(&sol.x);
    r.objective = num(sol.utility);
    r.feasible = report.is_feasible;
    r.feasibility.max_load = Some(num(sol.max_load));
    r.feasibility.violated = report.violated_rows;
    r.iterations = sol.iterations_run;
    r.stopped_early = sol.stopped_early;
    r.params.beta = num(p.beta);
    r.params.beta_prime = p.beta_prime.map(num);
    r.params.h = p.step.map(num);
    r.params.k = p.iterations;
    r.params.log_c = num(p.log_c);
    r.guarantee.form = guarantee_name(sol.guarantee_form);
    r.guarantee.eps_f = num(sol.eps_f);
    r.guarantee.bound = num(sol.guarantee_bound);
    r.dual.y = sol.dual.as_deref().map(nums);
    r.dual.gap = sol.gap.map(num);
    r.dual.slackness = sol.slackness.map(num);
    r.warnings = sol.warnings.clone();
    Ok(r)
}

fn covering_result(
    instance: &Instance,
    sol: &CoveringSolution,
    scale: f64,
) -> Result<RunResult, CliError> {
    let raw_y: Vec<f64> = sol.y.iter().map(|v| v * scale).collect();
    let residual = covering_residual(instance, &raw_y)?;
    let p = &sol.params;
    let mut r = RunResult::new("cover");
    r.fairness = num(p.beta);
    r.epsilon = num(p.epsilon);
    r.solution = nums(&sol.y);
    r.objective = num(sol.cost);
    r.feasible = residual.violated_columns.is_empty();
    r.feasibility.min_column_load = Some(num(sol.min_load));
    r.feasibility.pre_scale_min_column_load = Some(num(sol.pre_scale_residual));
    r.feasibility.violated = residual.violated_columns;
    r.iterations = sol.iterations_run;
    r.params.beta = num(p.beta);
    r.params.beta_prime = Some(num(p.beta_prime));
    r.params.h = Some(num(p.step));
    r.params.k = p.iterations;
    r.params.log_c = num(0.0);
    r.guarantee.form = "3*eps*(1+beta)*g";
    r.guarantee.eps_f = num(p.epsilon * (1.0 + p.beta) * sol.cost_avg);
    r.guarantee.bound = num(3.0 * p.epsilon * (1.0 + p.beta) * sol.cost_avg);
    r.dual.y_avg = Some(nums(&sol.y_avg));
    r.dual.cost_avg = Some(num(sol.cost_avg));
    r.dual.x = Some(nums(&sol.x));
    r.warnings = sol.warnings.clone();
    Ok(r)
}

fn run(args: &Args) -> Result<(), CliError> {
    let config = config(args)?;
    let file = File::open(&args.input).map_err(|e| io_err(&args.input, e))?;
    let raw = read_matrix_market(BufReader::new(file))?;
    let (instance, scaling) = standardize(&raw);
    let clock = Instant::now();

    let mode = match args.mode {
        ModeArg::Pack => Mode::Pack,
        ModeArg::Cover => Mode::Cover,
    };
    let (outcome, audit): (DistributedSolution, Option<LocalityAudit>) = match args.engine {
        Engine::Monolithic => match mode {
            Mode::Pack => (
                DistributedSolution::Packing(solve_packing(&instance, &config)?),
                None,
            ),
            Mode::Cover => (
                DistributedSolution::Covering(solve_covering(&instance, &config)?),
                None,
            ),
        },
        Engine::Rounds => {
            let (sol, audit) = run_distributed(&instance, &config, mode)?;
            (sol, Some(audit))
        }
    };
    let elapsed = clock.elapsed().as_secs_f64();

    let (mut result, trace): (RunResult, &[TraceRow]) = match &outcome {
        DistributedSolution::Packing(s) => (packing_result(&instance, s, scaling.scale)?, &s.trace),
        DistributedSolution::Covering(s) => {
            (covering_result(&instance, s, scaling.scale)?, &s.trace)
        }
    };
    result.engine = match args.engine {
        Engine::Monolithic => "monolithic",
        Engine::Rounds => "rounds",
    };
    result.scaling.scale = num(scaling.scale);
    result.scaling.rho = num(instance.rho());
    result.locality = audit.map(|a| output::Locality {
        rounds: a.rounds,
        reads: a.reads,
        out_of_column: a.out_of_column,
    });
    result.wall_clock_seconds = num(elapsed);

    if let Some(path) = &args.trace {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut out = BufWriter::new(file);
        write_trace_csv(&mut out, trace)?;
        out.flush().map_err(|e| io_err(path, e))?;
    }

    let text = result.to_json();
    match &args.output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| io_err(std::path::Path::new("<stdout>"), e))?;
        }
    }
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
