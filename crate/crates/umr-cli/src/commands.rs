//! The `umr` command surface. Every command returns the process exit code:
//! 0 on success, 3 when a solve stopped on a budget instead of converging;
//! input problems (2) and broken solver invariants (4) surface as errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use umr_core::baseline::{fit_baseline, independent_layers};
use umr_core::graph::connected_components;
use umr_core::lp::DEFAULT_EPSILON;
use umr_core::oracles::brute_force_hierarchy;
use umr_core::solver::{
    run, Instance, NullClock, Sequential, SolveReport, SolveStatus, SolverConfig, Termination,
};
use umr_core::weights::{ultrametric_from_hierarchy, LayerWeights, LevelSchedule};

use crate::error::CliError;
use crate::format::{
    self, AblateReport, BaselineReport, InstanceFile, OracleReport, Summary,
};
use crate::gen::{default_schedule, gen_grid};
use crate::runtime::{Threaded, WallClock};

/// Fits ultrametrics (nested multicut hierarchies) to edge targets on
/// planar graphs, with certified bounds.
#[derive(Parser)]
#[command(name = "umr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit a hierarchy to an instance; writes hierarchy, ultrametric,
    /// trace, and summary files.
    Solve(SolveArgs),
    /// Generate a grid instance with a planted hierarchy.
    Gen(GenArgs),
    /// Fit the merge-tree baseline and write its cost report.
    Baseline(BaselineArgs),
    /// Solve each level independently and report monotonicity violations.
    Ablate(AblateArgs),
    /// Solve a small instance exhaustively as a reference.
    Oracle(OracleArgs),
    /// Join solve and baseline outputs into a plot-ready ratio table.
    Eval(EvalArgs),
}

/// Schedule flags shared by every command that loads an instance: they only
/// matter when the instance file carries no schedule of its own.
#[derive(Args, Clone)]
pub struct ScheduleArgs {
    /// Levels of the derived default schedule.
    #[arg(long, default_value_t = 11)]
    pub levels: usize,
    /// Span lo,hi of the derived default schedule (default: the theta range).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub span: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file.
    pub instance: PathBuf,
    /// Output directory (default: $UMR_OUT_DIR, then the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// L1 penalty keeping the nesting multipliers small.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Stop when residual / max(1, |lb|) clears this tolerance.
    #[arg(long, default_value_t = 1e-6, conflicts_with = "tau_abs")]
    pub tau: f64,
    /// Stop on the absolute scaled residual instead.
    #[arg(long)]
    pub tau_abs: Option<f64>,
    /// Iteration budget.
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Wall-clock budget in seconds; engages the real clock.
    #[arg(long)]
    pub time_budget: Option<f64>,
    /// Rounding thresholds in [0,1).
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.2, 0.4, 0.6, 0.8])]
    pub thresholds: Vec<f64>,
    /// Record real seconds in the trace even without a time budget; the
    /// trace stops being byte-reproducible.
    #[arg(long)]
    pub wall_clock: bool,
    /// Run the per-level separations on worker threads.
    #[arg(long)]
    pub parallel: bool,
    /// Recorded in the summary; the solve itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Uniform perturbation amplitude on the planted targets.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BaselineArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args)]
pub struct AblateArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Run directories, each holding summary.txt and baseline.txt.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn dispatch(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Solve(args) => run_solve(args),
        Command::Gen(args) => run_gen(args),
        Command::Baseline(args) => run_baseline(args),
        Command::Ablate(args) => run_ablate(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Eval(args) => run_eval(args),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("UMR_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn load_instance(path: &Path, schedule: &ScheduleArgs) -> Result<(InstanceFile, String, LevelSchedule), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = InstanceFile::load(&path.display().to_string(), &text)?;
    let name = file.name(path);
    let span = schedule.span.as_ref().map(|v| (v[0], v[1]));
    let resolved = match &file.schedule {
        Some(s) => s.clone(),
        None => default_schedule(&file.graph.thetas(), schedule.levels, span)?,
    };
    Ok((file, name, resolved))
}

fn solver_config(
    epsilon: f64,
    tau: f64,
    tau_abs: Option<f64>,
    max_iters: usize,
    time_budget: Option<f64>,
    thresholds: &[f64],
) -> Result<SolverConfig, CliError> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(CliError::Usage("epsilon must be finite and nonnegative".into()));
    }
    let termination = match tau_abs {
        Some(t) if t > 0.0 => Termination::Absolute(t),
        Some(_) => return Err(CliError::Usage("tau-abs must be positive".into())),
        None if tau > 0.0 => Termination::Relative(tau),
        None => return Err(CliError::Usage("tau must be positive".into())),
    };
    if max_iters == 0 {
        return Err(CliError::Usage("max-iters must be positive".into()));
    }
    if let Some(budget) = time_budget {
        if !(budget > 0.0) {
            return Err(CliError::Usage("time-budget must be positive".into()));
        }
    }
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t >= 0.0 && *t < 1.0)) {
        return Err(CliError::Usage("thresholds must lie in [0, 1)".into()));
    }
    Ok(SolverConfig {
        epsilon,
        termination,
        max_iterations: max_iters,
        time_budget,
        thresholds: thresholds.to_vec(),
    })
}

fn dispatch_run(
    instance: &Instance,
    config: &SolverConfig,
    wall: bool,
    parallel: bool,
) -> umr_core::Result<SolveReport> {
    match (wall, parallel) {
        (false, false) => run(instance, config, &NullClock, &Sequential),
        (false, true) => run(instance, config, &NullClock, &Threaded),
        (true, false) => run(instance, config, &WallClock::new(), &Sequential),
        (true, true) => run(instance, config, &WallClock::new(), &Threaded),
    }
}

fn run_solve(args: &SolveArgs) -> Result<i32, CliError> {
    let (file, name, schedule) = load_instance(&args.instance, &args.schedule)?;
    let config = solver_config(
        args.epsilon,
        args.tau,
        args.tau_abs,
        args.max_iters,
        args.time_budget,
        &args.thresholds,
    )?;
    let instance = Instance::new(file.graph, schedule.clone()).map_err(CliError::Core)?;
    let wall = args.wall_clock || args.time_budget.is_some();
    let report = dispatch_run(&instance, &config, wall, args.parallel).map_err(CliError::Core)?;

    let dir = out_dir(&args.out)?;
    let hierarchy_text = format::save_hierarchy(&instance.graph, &report.hierarchy)?;
    write_file(&dir, "hierarchy.txt", &hierarchy_text)?;
    let distances = ultrametric_from_hierarchy(&schedule, &report.hierarchy.levels)
        .map_err(CliError::Core)?;
    write_file(&dir, "ultrametric.txt", &format::save_ultrametric(&distances))?;
    write_file(&dir, "trace.csv", &format::save_trace(&report.trace, instance.num_levels()))?;
    let summary = Summary {
        instance: name.clone(),
        status: report.status.to_string(),
        iterations: report.iterations,
        levels: instance.num_levels(),
        epsilon: config.epsilon,
        lower_bound: report.lower_bound,
        upper_bound: report.upper_bound,
        gap: report.gap,
        residual: report.residual,
        constant: report.constant,
        distortion_lower: report.constant + report.lower_bound,
        distortion_upper: report.constant + report.upper_bound,
        lb_regressions: report.lb_regressions,
        seed: args.seed,
    };
    write_file(&dir, "summary.txt", &format::save_summary(&summary))?;

    println!(
        "solve {name}: status={} iterations={} lb={} ub={} gap={}",
        report.status,
        report.iterations,
        format::fmt_f64(report.lower_bound),
        format::fmt_f64(report.upper_bound),
        format::fmt_f64(report.gap),
    );
    Ok(if report.status == SolveStatus::Converged { 0 } else { 3 })
}

fn run_gen(args: &GenArgs) -> Result<i32, CliError> {
    let file = gen_grid(args.rows, args.cols, args.levels, args.noise, args.seed)?;
    let text = file.save();
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
            println!(
                "gen {}: {} vertices, {} edges, {} levels",
                path.display(),
                file.graph.num_vertices(),
                file.graph.num_edges(),
                file.schedule.as_ref().map_or(0, |s| s.num_levels()),
            );
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn run_baseline(args: &BaselineArgs) -> Result<i32, CliError> {
    let (file, name, schedule) = load_instance(&args.instance, &args.schedule)?;
    let lw = LayerWeights::from_graph(&file.graph, &schedule).map_err(CliError::Core)?;
    let (_, fit) = fit_baseline(&file.graph, &lw).map_err(CliError::Core)?;
    let report = BaselineReport {
        instance: name.clone(),
        levels: lw.num_levels(),
        monotone_premise: fit.monotone_premise,
        nested: fit.nested,
        thresholds: fit.thresholds,
        per_level_costs: fit.per_level_costs,
        total_cost: fit.cost,
        distortion_cost: lw.constant_total() + fit.cost,
    };
    let dir = out_dir(&args.out)?;
    write_file(&dir, "baseline.txt", &format::save_baseline(&report))?;
    println!(
        "baseline {name}: cost={} distortion={} nested={}",
        format::fmt_f64(report.total_cost),
        format::fmt_f64(report.distortion_cost),
        report.nested,
    );
    Ok(0)
}

fn run_ablate(args: &AblateArgs) -> Result<i32, CliError> {
    let (file, name, schedule) = load_instance(&args.instance, &args.schedule)?;
    let config = solver_config(args.epsilon, args.tau, None, args.max_iters, None, &[0.0, 0.5])?;
    let instance = Instance::new(file.graph, schedule).map_err(CliError::Core)?;
    let hierarchical = dispatch_run(&instance, &config, false, false).map_err(CliError::Core)?;
    let independent = independent_layers(&instance, &config).map_err(CliError::Core)?;

    let lw = &instance.weights;
    let hierarchical_costs: Vec<f64> = (1..=lw.num_levels())
        .map(|l| {
            lw.layer(l)
                .iter()
                .zip(&hierarchical.hierarchy.levels[l - 1])
                .map(|(w, &z)| if z { *w } else { 0.0 })
                .sum()
        })
        .collect();
    let report = AblateReport {
        instance: name.clone(),
        levels: lw.num_levels(),
        independent_costs: independent.costs.clone(),
        hierarchical_costs,
        statuses: independent.statuses.iter().map(|s| s.to_string()).collect(),
        violations: independent.violations.clone(),
        nested: independent.is_nested(),
    };
    let dir = out_dir(&args.out)?;
    write_file(&dir, "ablate.txt", &format::save_ablate(&report))?;
    println!(
        "ablate {name}: independent={} hierarchical={} violations={} nested={}",
        format::fmt_f64(independent.total_cost()),
        format::fmt_f64(hierarchical.upper_bound),
        report.violations.len(),
        report.nested,
    );
    let all_converged = hierarchical.status == SolveStatus::Converged
        && independent.statuses.iter().all(|s| *s == SolveStatus::Converged);
    Ok(if all_converged { 0 } else { 3 })
}

fn run_oracle(args: &OracleArgs) -> Result<i32, CliError> {
    let (file, name, schedule) = load_instance(&args.instance, &args.schedule)?;
    let lw = LayerWeights::from_graph(&file.graph, &schedule).map_err(CliError::Core)?;
    let layers: Vec<Vec<f64>> = (1..=lw.num_levels()).map(|l| lw.layer(l).to_vec()).collect();
    let (cuts, optimum) = brute_force_hierarchy(&file.graph, &layers).map_err(CliError::Core)?;
    for cut in &cuts {
        // The enumerated optimum must itself re-validate as a hierarchy.
        connected_components(&file.graph, cut).map_err(CliError::Core)?;
    }
    let report = OracleReport {
        instance: name.clone(),
        levels: lw.num_levels(),
        optimum,
        distortion: lw.constant_total() + optimum,
        cuts,
    };
    let dir = out_dir(&args.out)?;
    write_file(&dir, "oracle.txt", &format::save_oracle(&report))?;
    println!(
        "oracle {name}: optimum={} distortion={}",
        format::fmt_f64(report.optimum),
        format::fmt_f64(report.distortion),
    );
    Ok(0)
}

fn run_eval(args: &EvalArgs) -> Result<i32, CliError> {
    let mut rows = Vec::new();
    for dir in &args.runs {
        let summary_path = dir.join("summary.txt");
        let summary_text =
            fs::read_to_string(&summary_path).map_err(|e| CliError::io(&summary_path, e))?;
        let summary = format::load_summary(&summary_path.display().to_string(), &summary_text)?;
        let baseline_path = dir.join("baseline.txt");
        let baseline_text =
            fs::read_to_string(&baseline_path).map_err(|e| CliError::io(&baseline_path, e))?;
        let baseline =
            format::load_baseline(&baseline_path.display().to_string(), &baseline_text)?;
        if summary.instance != baseline.instance {
            return Err(CliError::Usage(format!(
                "{} pairs solve of {:?} with baseline of {:?}",
                dir.display(),
                summary.instance,
                baseline.instance
            )));
        }
        rows.push((summary, baseline));
    }

    // Ratios use distortion units, which are nonnegative by construction;
    // both orientations are emitted, named by what is divided by what.
    let mut csv = String::from(
        "name,status,lower_bound,upper_bound,gap,baseline_cost,solver_distortion,baseline_distortion,solver_over_baseline,baseline_over_solver\n",
    );
    let mut gaps = Vec::new();
    let mut dominated = 0usize;
    for (summary, baseline) in &rows {
        let solver_distortion = summary.distortion_upper;
        let baseline_distortion = baseline.distortion_cost;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            summary.instance,
            summary.status,
            format::fmt_f64(summary.lower_bound),
            format::fmt_f64(summary.upper_bound),
            format::fmt_f64(summary.gap),
            format::fmt_f64(baseline.total_cost),
            format::fmt_f64(solver_distortion),
            format::fmt_f64(baseline_distortion),
            format::fmt_f64(solver_distortion / baseline_distortion),
            format::fmt_f64(baseline_distortion / solver_distortion),
        ));
        gaps.push(summary.gap);
        if summary.upper_bound <= baseline.total_cost + 1e-7 {
            dominated += 1;
        }
    }
    let dir = out_dir(&args.out)?;
    write_file(&dir, "eval.csv", &csv)?;

    gaps.sort_by(f64::total_cmp);
    let median_gap = if gaps.is_empty() {
        0.0
    } else if gaps.len() % 2 == 1 {
        gaps[gaps.len() / 2]
    } else {
        0.5 * (gaps[gaps.len() / 2 - 1] + gaps[gaps.len() / 2])
    };
    println!(
        "eval: {} runs, median gap {}, solver at or below baseline on {}/{}",
        rows.len(),
        format::fmt_f64(median_gap),
        dominated,
        rows.len(),
    );
    Ok(0)
}
