//! Experiment harness: generate instances, run variants against each other,
//! and summarize makespan ratios against a baseline variant.
//!
//! Instance `i` (1-based) uses seed `base_seed + i`. Instances are processed
//! in parallel but aggregated in index order, so every makespan in a report
//! is a pure function of the configuration. Wall times are informative only.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::generator::{generate, GenError, GenRanges};
use crate::model::Time;
use crate::scheduler::{run_stream, RunError, Variant};
use crate::verify::{
    brute_force_opt, check_schedule, idle_time, OptError, OptLimits, ScheduleViolation,
};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub instances: usize,
    pub ranges: GenRanges,
    pub variants: Vec<Variant>,
    pub baseline: Variant,
    pub base_seed: u64,
    /// Compute the exact optimum for instances within these limits.
    pub oracle: Option<OptLimits>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl BenchConfig {
    pub fn new(instances: usize, ranges: GenRanges, base_seed: u64) -> Self {
        BenchConfig {
            instances,
            ranges,
            variants: Variant::ALL.to_vec(),
            baseline: Variant::Ect,
            base_seed,
            oracle: None,
            threads: None,
        }
    }

    pub fn instance_seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }
}

#[derive(Debug, Clone, Error)]
pub enum BenchError {
    #[error("bench needs at least one instance")]
    NoInstances,
    #[error("bench needs at least one variant")]
    NoVariants,
    #[error("baseline {0} is not among the selected variants")]
    BaselineMissing(Variant),
    #[error("instance {index} (seed {seed}): generation failed: {source}")]
    Generate {
        index: usize,
        seed: u64,
        source: GenError,
    },
    #[error("instance {index} (seed {seed}), {variant}: {source}")]
    Schedule {
        index: usize,
        seed: u64,
        variant: Variant,
        source: RunError,
    },
    #[error("instance {index} (seed {seed}), {variant}: schedule failed validation ({} violations, first: {})", .violations.len(), .violations[0])]
    Infeasible {
        index: usize,
        seed: u64,
        variant: Variant,
        violations: Vec<ScheduleViolation>,
    },
    #[error("instance {index} (seed {seed}): optimum failed: {source}")]
    Oracle {
        index: usize,
        seed: u64,
        source: OptError,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantRun {
    pub variant: Variant,
    pub makespan: Time,
    pub wall: Duration,
    pub idle_total: Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRow {
    pub index: usize,
    pub seed: u64,
    pub task_types: usize,
    pub machines: usize,
    pub jobs: usize,
    pub tasks: usize,
    pub lower_bound: Time,
    pub runs: Vec<VariantRun>,
    /// Exact optimum, when requested and the instance is small enough.
    pub opt: Option<Time>,
}

impl InstanceRow {
    pub fn run(&self, variant: Variant) -> Option<&VariantRun> {
        self.runs.iter().find(|r| r.variant == variant)
    }
}

/// `value / baseline`, compared exactly by cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MakespanRatio {
    pub value: Time,
    pub baseline: Time,
}

impl MakespanRatio {
    pub fn new(value: Time, baseline: Time) -> Self {
        MakespanRatio { value, baseline }
    }

    pub fn as_f64(&self) -> f64 {
        if self.baseline == 0 {
            return if self.value == 0 { 1.0 } else { f64::INFINITY };
        }
        self.value as f64 / self.baseline as f64
    }

    pub fn bucket(&self) -> Bucket {
        let (a, b) = (self.value as i128, self.baseline as i128);
        if a < b {
            Bucket::Better
        } else if a == b {
            Bucket::Equal
        } else if 5 * a < 6 * b {
            Bucket::Within20
        } else if a < 2 * b {
            Bucket::UpTo2
        } else if a < 3 * b {
            Bucket::UpTo3
        } else {
            Bucket::Beyond3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    Better,
    Equal,
    Within20,
    UpTo2,
    UpTo3,
    Beyond3,
}

impl Bucket {
    pub const ALL: [Bucket; 6] = [
        Bucket::Better,
        Bucket::Equal,
        Bucket::Within20,
        Bucket::UpTo2,
        Bucket::UpTo3,
        Bucket::Beyond3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Bucket::Better => "<1",
            Bucket::Equal => "=1",
            Bucket::Within20 => "(1,1.2)",
            Bucket::UpTo2 => "[1.2,2)",
            Bucket::UpTo3 => "[2,3)",
            Bucket::Beyond3 => "[3,inf)",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Buckets {
    pub counts: [usize; 6],
}

impl Buckets {
    pub fn get(&self, b: Bucket) -> usize {
        self.counts[b as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn bucketize(ratios: &[MakespanRatio]) -> Buckets {
    let mut out = Buckets::default();
    for r in ratios {
        out.counts[r.bucket() as usize] += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub variants: Vec<Variant>,
    pub baseline: Variant,
    pub oracle: bool,
    pub rows: Vec<InstanceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl BenchReport {
    pub fn makespans(&self, variant: Variant) -> Vec<Time> {
        self.rows
            .iter()
            .filter_map(|r| r.run(variant).map(|v| v.makespan))
            .collect()
    }

    pub fn ratios(&self, variant: Variant) -> Vec<MakespanRatio> {
        self.rows
            .iter()
            .filter_map(|r| {
                Some(MakespanRatio::new(
                    r.run(variant)?.makespan,
                    r.run(self.baseline)?.makespan,
                ))
            })
            .collect()
    }

    pub fn buckets(&self, variant: Variant) -> Buckets {
        bucketize(&self.ratios(variant))
    }

    pub fn mean_ratio(&self, variant: Variant) -> f64 {
        let r = self.ratios(variant);
        if r.is_empty() {
            return f64::NAN;
        }
        r.iter().map(MakespanRatio::as_f64).sum::<f64>() / r.len() as f64
    }

    /// Win means a strictly smaller makespan than the baseline.
    pub fn win_tie_loss(&self, variant: Variant) -> WinTieLoss {
        let mut w = WinTieLoss::default();
        for r in self.ratios(variant) {
            match r.value.cmp(&r.baseline) {
                std::cmp::Ordering::Less => w.wins += 1,
                std::cmp::Ordering::Equal => w.ties += 1,
                std::cmp::Ordering::Greater => w.losses += 1,
            }
        }
        w
    }

    pub fn total_wall(&self, variant: Variant) -> Duration {
        self.rows
            .iter()
            .filter_map(|r| r.run(variant).map(|v| v.wall))
            .sum()
    }

    pub fn mean_idle(&self, variant: Variant) -> f64 {
        let v: Vec<Time> = self
            .rows
            .iter()
            .filter_map(|r| r.run(variant).map(|v| v.idle_total))
            .collect();
        v.iter().sum::<Time>() as f64 / v.len().max(1) as f64
    }

    /// Fraction of instances with a known optimum where `variant` hits it.
    pub fn opt_match(&self, variant: Variant) -> Option<(usize, usize)> {
        let with_opt: Vec<_> = self
            .rows
            .iter()
            .filter_map(|r| Some((r.run(variant)?.makespan, r.opt?)))
            .collect();
        if with_opt.is_empty() {
            return None;
        }
        let hits = with_opt.iter().filter(|(m, o)| m == o).count();
        Some((hits, with_opt.len()))
    }
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if config.instances == 0 {
        return Err(BenchError::NoInstances);
    }
    if config.variants.is_empty() {
        return Err(BenchError::NoVariants);
    }
    if !config.variants.contains(&config.baseline) {
        return Err(BenchError::BaselineMissing(config.baseline));
    }
    let mut variants: Vec<Variant> = Vec::with_capacity(config.variants.len());
    for &v in &config.variants {
        if !variants.contains(&v) {
            variants.push(v);
        }
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let results: Vec<Result<InstanceRow, BenchError>> = pool.install(|| {
        (1..=config.instances)
            .into_par_iter()
            .map(|i| run_instance(config, &variants, i))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport {
        variants,
        baseline: config.baseline,
        oracle: config.oracle.is_some(),
        rows,
    })
}

fn run_instance(
    config: &BenchConfig,
    variants: &[Variant],
    index: usize,
) -> Result<InstanceRow, BenchError> {
    let seed = config.instance_seed(index);
    let gen_err = |source| BenchError::Generate {
        index,
        seed,
        source,
    };
    let gen = config.ranges.draw(seed).map_err(gen_err)?;
    let instance = generate(&gen).map_err(gen_err)?;

    let mut runs = Vec::with_capacity(variants.len());
    for &variant in variants {
        let started = Instant::now();
        let schedule = run_stream(&instance, variant).map_err(|source| BenchError::Schedule {
            index,
            seed,
            variant,
            source,
        })?;
        let wall = started.elapsed();
        let report = check_schedule(&instance, &schedule);
        if !report.is_empty() {
            return Err(BenchError::Infeasible {
                index,
                seed,
                variant,
                violations: report.violations,
            });
        }
        runs.push(VariantRun {
            variant,
            makespan: schedule.makespan(),
            wall,
            idle_total: idle_time(&schedule),
        });
    }

    let opt = match config.oracle {
        None => None,
        Some(limits) => match brute_force_opt(&instance, limits) {
            Ok(r) => Some(r.opt_makespan),
            Err(OptError::TooLarge { .. }) => None,
            Err(source) => {
                return Err(BenchError::Oracle {
                    index,
                    seed,
                    source,
                })
            }
        },
    };
    let lower_bound = crate::scheduler::makespan_lower_bounds(&instance)
        .map(|b| b.max())
        .unwrap_or(0);

    Ok(InstanceRow {
        index,
        seed,
        task_types: instance.task_types(),
        machines: instance.machines(),
        jobs: instance.jobs().len(),
        tasks: instance.task_count(),
        lower_bound,
        runs,
        opt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

/// Renders the report. The text form leaves out wall times so that it is
/// identical across runs; see [`render_timings`].
pub fn report_render(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Text => render_text(report),
    }
}

fn render_csv(report: &BenchReport) -> String {
    let mut out = String::from("instance,seed,t,m,L,variant,makespan,wall_ms,idle_total");
    if report.oracle {
        out.push_str(",opt");
    }
    out.push('\n');
    for row in &report.rows {
        for run in &row.runs {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{:.3},{}",
                row.index,
                row.seed,
                row.task_types,
                row.machines,
                row.jobs,
                run.variant,
                run.makespan,
                run.wall.as_secs_f64() * 1e3,
                run.idle_total
            );
            if report.oracle {
                out.push(',');
                if let Some(o) = row.opt {
                    let _ = write!(out, "{o}");
                }
            }
            out.push('\n');
        }
    }
    out
}

fn pct(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * n as f64 / total as f64
    }
}

fn render_text(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{:>8} {:>20} {:>4} {:>4} {:>5} {:>6} {:>6}",
        "instance", "seed", "t", "m", "L", "tasks", "lb"
    );
    for v in &report.variants {
        let _ = write!(out, " {:>8}", v.name());
    }
    if report.oracle {
        let _ = write!(out, " {:>8}", "opt");
    }
    out.push('\n');
    for row in &report.rows {
        let _ = write!(
            out,
            "{:>8} {:>20} {:>4} {:>4} {:>5} {:>6} {:>6}",
            row.index, row.seed, row.task_types, row.machines, row.jobs, row.tasks, row.lower_bound
        );
        for run in &row.runs {
            let _ = write!(out, " {:>8}", run.makespan);
        }
        if report.oracle {
            match row.opt {
                Some(o) => {
                    let _ = write!(out, " {o:>8}");
                }
                None => {
                    let _ = write!(out, " {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }

    let n = report.rows.len();
    let _ = writeln!(
        out,
        "\nsummary over {n} instances (baseline {})",
        report.baseline
    );
    let _ = writeln!(
        out,
        "{:<8} {:>14} {:>10} {:>10} {:>14}",
        "variant", "total_makespan", "mean_ratio", "mean_idle", "win/tie/loss"
    );
    for &v in &report.variants {
        let total: Time = report.makespans(v).iter().sum();
        let w = report.win_tie_loss(v);
        let _ = writeln!(
            out,
            "{:<8} {:>14} {:>10.4} {:>10.2} {:>14}",
            v.name(),
            total,
            report.mean_ratio(v),
            report.mean_idle(v),
            format!("{}/{}/{}", w.wins, w.ties, w.losses)
        );
    }

    let _ = write!(
        out,
        "\nratio buckets vs {}\n{:<8}",
        report.baseline, "variant"
    );
    for b in Bucket::ALL {
        let _ = write!(out, " {:>15}", b.label());
    }
    out.push('\n');
    for &v in &report.variants {
        if v == report.baseline {
            continue;
        }
        let buckets = report.buckets(v);
        let _ = write!(out, "{:<8}", v.name());
        for b in Bucket::ALL {
            let c = buckets.get(b);
            let _ = write!(
                out,
                " {:>15}",
                format!("{c} ({:.1}%)", pct(c, buckets.total()))
            );
        }
        out.push('\n');
    }

    if report.oracle {
        out.push('\n');
        for &v in &report.variants {
            if let Some((hits, total)) = report.opt_match(v) {
                let _ = writeln!(
                    out,
                    "{} = opt in {hits} of {total} instances ({:.1}%)",
                    v.name(),
                    pct(hits, total)
                );
            }
        }
    }
    out
}

/// Wall-time totals per variant; varies between runs.
pub fn render_timings(report: &BenchReport) -> String {
    let mut out = String::new();
    let n = report.rows.len().max(1) as f64;
    for &v in &report.variants {
        let total = report.total_wall(v).as_secs_f64() * 1e3;
        let _ = writeln!(
            out,
            "{} wall total {total:.3} ms, mean {:.3} ms",
            v.name(),
            total / n
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        let mut c = BenchConfig::new(2, GenRanges::mixed(), 7);
        c.variants = vec![Variant::Ect, Variant::Spt];
        c
    }

    #[test]
    fn bucket_placement() {
        let r = |a, b| MakespanRatio::new(a, b);
        let b = bucketize(&[r(2, 2), r(3, 2), r(5, 2), r(7, 2)]);
        assert_eq!(b.counts, [0, 1, 0, 1, 1, 1]);
        let all_one = bucketize(&[r(4, 4), r(9, 9), r(1, 1)]);
        assert_eq!(all_one.counts, [0, 3, 0, 0, 0, 0]);
        // 1.2 exactly is left-closed into [1.2, 2).
        assert_eq!(r(6, 5).bucket(), Bucket::UpTo2);
        assert_eq!(r(12, 10).bucket(), Bucket::UpTo2);
        assert_eq!(r(119, 100).bucket(), Bucket::Within20);
        assert_eq!(r(2, 1).bucket(), Bucket::UpTo3);
        assert_eq!(r(3, 1).bucket(), Bucket::Beyond3);
        assert_eq!(r(1, 2).bucket(), Bucket::Better);
    }

    #[test]
    fn zero_baseline_ratio() {
        assert_eq!(MakespanRatio::new(0, 0).as_f64(), 1.0);
        assert_eq!(MakespanRatio::new(0, 0).bucket(), Bucket::Equal);
        assert!(MakespanRatio::new(3, 0).as_f64().is_infinite());
    }

    #[test]
    fn structure_and_cleanliness() {
        let report = run_bench(&small()).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.runs.len(), 2);
            assert!(row.runs.iter().all(|r| r.makespan >= row.lower_bound));
        }
        assert_eq!(report.rows[0].seed, 8);
        assert_eq!(report.rows[1].seed, 9);
        let b = report.buckets(Variant::Spt);
        assert_eq!(b.total(), 2);
        assert_eq!(report.buckets(Variant::Ect).get(Bucket::Equal), 2);
        assert_eq!(report.mean_ratio(Variant::Ect), 1.0);
    }

    #[test]
    fn repeat_runs_match() {
        let mut c = small();
        c.instances = 6;
        c.threads = Some(3);
        let a = run_bench(&c).unwrap();
        c.threads = Some(1);
        let b = run_bench(&c).unwrap();
        for v in [Variant::Ect, Variant::Spt] {
            assert_eq!(a.makespans(v), b.makespans(v));
        }
        assert_eq!(
            report_render(&a, ReportFormat::Text),
            report_render(&b, ReportFormat::Text)
        );
    }

    #[test]
    fn config_errors() {
        let mut c = small();
        c.instances = 0;
        assert!(matches!(run_bench(&c), Err(BenchError::NoInstances)));
        let mut c = small();
        c.variants.clear();
        assert!(matches!(run_bench(&c), Err(BenchError::NoVariants)));
        let mut c = small();
        c.variants = vec![Variant::Spt];
        assert!(matches!(
            run_bench(&c),
            Err(BenchError::BaselineMissing(Variant::Ect))
        ));
    }

    #[test]
    fn oracle_column() {
        let mut c = BenchConfig::new(5, GenRanges::tiny(), 100);
        c.oracle = Some(OptLimits::default());
        let report = run_bench(&c).unwrap();
        for row in &report.rows {
            if let Some(opt) = row.opt {
                assert!(row.runs.iter().all(|r| r.makespan >= opt));
            } else {
                assert!(row.tasks > 7);
            }
        }
        let csv = report_render(&report, ReportFormat::Csv);
        assert!(csv.starts_with("instance,seed,t,m,L,variant,makespan,wall_ms,idle_total,opt\n"));
        assert_eq!(csv.lines().count(), 1 + 5 * 3);
    }

    #[test]
    fn rendering() {
        let report = run_bench(&small()).unwrap();
        let csv = report_render(&report, ReportFormat::Csv);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "instance,seed,t,m,L,variant,makespan,wall_ms,idle_total"
        );
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].starts_with("1,8,"));
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 9));

        let text = report_render(&report, ReportFormat::Text);
        let table_rows = text.lines().skip(1).take_while(|l| !l.is_empty()).count();
        assert_eq!(table_rows, 2);
        assert!(text.contains("ratio buckets vs ect"));
        assert!(text.contains("win/tie/loss"));
        assert!(render_timings(&report).contains("ect wall total"));
    }
}
