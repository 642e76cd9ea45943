//! Command-line front end. [`run`] takes the argument list and two output
//! streams and returns the process exit code:
//! 0 on success, 1 for domain failures, 2 for usage, I/O and parse errors.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flowsched::bench::{render_timings, report_render, run_bench, BenchConfig, ReportFormat};
use flowsched::generator::{generate, GenConfig, GenRanges};
use flowsched::io::{
    parse_instance_with_warnings, read_schedule_csv, render_gantt, write_instance,
    write_schedule_csv, GanttFormat,
};
use flowsched::scheduler::makespan_lower_bounds;
use flowsched::verify::{brute_force_opt, check_schedule, idle_time, OptError, OptLimits};
use flowsched::{run_stream, Instance, Schedule, Time, Variant};
use thiserror::Error;

pub const THREADS_ENV: &str = "FLOWSCHED_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "flowsched",
    version,
    about = "Online greedy scheduling on unrelated machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schedule an instance online with one policy.
    Solve(SolveArgs),
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Run policies over many random instances.
    Bench(BenchArgs),
    /// Exact optimum by exhaustive search (tiny instances only).
    Opt(OptArgs),
    /// Check an instance, or a schedule against it.
    Validate(ValidateArgs),
    /// Draw a schedule as text or SVG.
    Gantt(GanttArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// ect|est|spt (or 3|4|5)
    #[arg(long, value_parser = parse_from_str::<Variant>)]
    variant: Variant,
    #[arg(long)]
    input: PathBuf,
    /// Write the schedule as CSV.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Write a Gantt chart; `.svg` gives SVG, anything else text.
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long = "t")]
    task_types: usize,
    #[arg(long = "m")]
    machines: usize,
    #[arg(long = "L")]
    jobs: usize,
    #[arg(long, default_value_t = 1)]
    dur_lo: Time,
    #[arg(long, default_value_t = 100)]
    dur_hi: Time,
    /// Blocks per job, `N` or `LO..HI`.
    #[arg(long = "f", default_value = "1", value_parser = parse_range)]
    blocks: RangeInclusive<usize>,
    /// Tasks per block, `N` or `LO..HI`.
    #[arg(long = "k", default_value = "1", value_parser = parse_range)]
    tasks: RangeInclusive<usize>,
    /// Probability that a matrix entry is marked incapable.
    #[arg(long = "p", default_value_t = 0.0)]
    incapable: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Mixed,
    Tiny,
    Medium,
    Large,
}

impl Preset {
    fn ranges(self) -> GenRanges {
        match self {
            Preset::Desk => GenRanges::desk(),
            Preset::Mixed => GenRanges::mixed(),
            Preset::Tiny => GenRanges::tiny(),
            Preset::Medium => GenRanges::medium(),
            Preset::Large => GenRanges::large(),
        }
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Comma-separated list, e.g. `ect,spt`.
    #[arg(long, value_delimiter = ',', default_value = "ect,est,spt", value_parser = parse_from_str::<Variant>)]
    variants: Vec<Variant>,
    #[arg(long, default_value = "ect", value_parser = parse_from_str::<Variant>)]
    baseline: Variant,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-instance CSV report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the exact optimum where the instance is small enough.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
}

#[derive(Debug, Args)]
struct OptArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = OptLimits::default().max_tasks)]
    max_tasks: usize,
    #[arg(long, default_value_t = OptLimits::default().max_machines)]
    max_machines: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GanttArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value = "text", value_parser = parse_from_str::<GanttFormat>)]
    format: GanttFormat,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_from_str<T>(s: &str) -> Result<T, String>
where
    T: FromStr,
    T::Err: Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

/// `N`, `LO..HI` or `LO..=HI`, both ends inclusive.
fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{x}` is not a count"))
    };
    match s.split_once("..") {
        None => num(s).map(|n| n..=n),
        Some((lo, hi)) => Ok(num(lo)?..=num(hi.strip_prefix('=').unwrap_or(hi))?),
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            _ => 2,
        }
    }
}

type CliResult = Result<(), CliError>;

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Generate(a) => generate_cmd(a, out),
        Command::Bench(a) => bench(a, threads.as_deref(), out, err),
        Command::Opt(a) => opt(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Gantt(a) => gantt(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit(out: &mut dyn Write, text: impl Display) -> CliResult {
    write!(out, "{text}").map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Parses the dataset and rejects instances with hard violations.
fn load_instance(path: &Path, out: &mut dyn Write) -> Result<Instance, CliError> {
    let (inst, warnings) =
        parse_instance_with_warnings(&read(path)?).map_err(|e| CliError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
    for w in warnings {
        emit(out, format_args!("warning: {w}\n"))?;
    }
    let v = inst.validate();
    for w in &v.warnings {
        emit(out, format_args!("warning: {w}\n"))?;
    }
    if !v.is_ok() {
        let list: Vec<String> = v.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Domain(format!(
            "invalid instance: {}",
            list.join("; ")
        )));
    }
    Ok(inst)
}

fn load_schedule(path: &Path, machines: usize) -> Result<Schedule, CliError> {
    let rows = read_schedule_csv(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    Ok(Schedule::new(machines, rows))
}

fn gantt_format_for(path: &Path) -> GanttFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("svg") => GanttFormat::Svg,
        _ => GanttFormat::Text,
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.input, &mut std::io::sink())?;
    let schedule = run_stream(&inst, a.variant).map_err(|e| CliError::Domain(e.to_string()))?;
    let lb = makespan_lower_bounds(&inst).map_err(|e| CliError::Domain(e.to_string()))?;
    emit(out, format_args!("makespan {}\n", schedule.makespan()))?;
    emit(out, format_args!("variant {}\n", a.variant))?;
    emit(
        out,
        format_args!(
            "tasks {} machines {} lower_bound {} idle {}\n",
            schedule.assignments().len(),
            inst.machines(),
            lb.max(),
            idle_time(&schedule)
        ),
    )?;
    if let Some(path) = &a.schedule {
        write_file(path, &write_schedule_csv(&schedule))?;
    }
    if let Some(path) = &a.gantt {
        let chart = render_gantt(&schedule, gantt_format_for(path))
            .map_err(|e| CliError::Domain(e.to_string()))?;
        write_file(path, &chart)?;
    }
    Ok(())
}

fn generate_cmd(a: GenerateArgs, out: &mut dyn Write) -> CliResult {
    let config = GenConfig {
        task_types: a.task_types,
        machines: a.machines,
        jobs: a.jobs,
        durations: a.dur_lo..=a.dur_hi,
        blocks_per_job: a.blocks,
        tasks_per_block: a.tasks,
        incapable_probability: a.incapable,
        seed: a.seed,
    };
    let inst = generate(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&a.out, &write_instance(&inst))?;
    emit(
        out,
        format_args!(
            "wrote {} ({} jobs, {} tasks)\n",
            a.out.display(),
            inst.jobs().len(),
            inst.task_count()
        ),
    )
}

fn parse_threads(raw: Option<&str>) -> Result<Option<usize>, CliError> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a nonnegative integer, got `{s}`"
            ))),
        },
    }
}

fn bench(
    a: BenchArgs,
    threads: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let mut config = BenchConfig::new(a.n, a.preset.ranges(), a.seed);
    config.variants = a.variants;
    config.baseline = a.baseline;
    config.oracle = a.oracle.then(OptLimits::default);
    config.threads = parse_threads(threads)?;
    let report = run_bench(&config).map_err(|e| match e {
        flowsched::bench::BenchError::NoInstances
        | flowsched::bench::BenchError::NoVariants
        | flowsched::bench::BenchError::BaselineMissing(_) => CliError::Usage(e.to_string()),
        other => CliError::Domain(other.to_string()),
    })?;
    if let Some(path) = &a.out {
        write_file(path, &report_render(&report, ReportFormat::Csv))?;
    }
    emit(out, report_render(&report, ReportFormat::Text))?;
    let _ = write!(err, "{}", render_timings(&report));
    Ok(())
}

fn opt(a: OptArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.input, &mut std::io::sink())?;
    let limits = OptLimits {
        max_tasks: a.max_tasks,
        max_machines: a.max_machines,
    };
    let result = brute_force_opt(&inst, limits).map_err(|e| match e {
        OptError::TooLarge { .. } | OptError::UnsolvableType { .. } => {
            CliError::Domain(e.to_string())
        }
    })?;
    emit(out, format_args!("opt {}\n", result.opt_makespan))?;
    emit(out, format_args!("explored {}\n", result.explored))?;
    emit(out, write_schedule_csv(&result.witness))
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.input, out)?;
    let Some(path) = &a.schedule else {
        return emit(out, "ok\n");
    };
    let schedule = load_schedule(path, inst.machines())?;
    let report = check_schedule(&inst, &schedule);
    if report.is_empty() {
        return emit(out, format_args!("ok makespan {}\n", schedule.makespan()));
    }
    for v in &report.violations {
        emit(out, format_args!("{v}\n"))?;
    }
    Err(CliError::Domain(format!(
        "schedule has {} violation(s)",
        report.violations.len()
    )))
}

fn gantt(a: GanttArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.input, &mut std::io::sink())?;
    let schedule = load_schedule(&a.schedule, inst.machines())?;
    let chart = render_gantt(&schedule, a.format).map_err(|e| CliError::Domain(e.to_string()))?;
    match &a.out {
        Some(path) => write_file(path, &chart),
        None => emit(out, chart),
    }
}
