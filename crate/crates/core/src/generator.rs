//! Reproducible random instances.
//!
//! Randomness comes from splitmix64 so that a seed yields the same dataset
//! in any implementation of the draw order below.
//!
//! Draw order for [`generate`]:
//!
//! 1. The matrix, row by row. Each entry draws its magnitude from
//!    `durations`; when `incapable_probability > 0` it then draws one more raw
//!    value to decide the sign (see [`SplitMix64::next_unit`]).
//! 2. Every column that came out all-negative is redrawn (entries in row
//!    order, same two draws each) until it has a positive entry. Columns are
//!    repaired left to right.
//! 3. Per job: the block count, then per block its length followed by the
//!    task types of that block.

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::model::{Block, Instance, Job, Time, TimeMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("empty range: lo {lo} > hi {hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("{what} must be at least 1")]
    ZeroCount { what: &'static str },
    #[error("durations must be at least 1, got {0}")]
    NonPositiveDuration(Time),
    #[error("incapable probability must be in [0, 1), got {0}")]
    BadProbability(f64),
}

/// splitmix64: `state += 0x9E3779B97F4A7C15`, then two xor-shift-multiply
/// rounds and a final xor-shift on the new state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[lo, hi]` as `lo + raw mod (hi - lo + 1)`. The
    /// modulo bias is below 2^-50 for spans up to a few thousand.
    pub fn next_uniform(&mut self, lo: i64, hi: i64) -> Result<i64, GenError> {
        if lo > hi {
            return Err(GenError::EmptyRange { lo, hi });
        }
        let span = (hi as i128 - lo as i128 + 1) as u128;
        let raw = self.next_u64() as u128;
        Ok((lo as i128 + (raw % span) as i128) as i64)
    }

    fn uniform_usize(&mut self, range: &RangeInclusive<usize>) -> usize {
        self.next_uniform(*range.start() as i64, *range.end() as i64)
            .expect("range checked by caller") as usize
    }

    /// Uniform value in `[0, 1)` from the top 53 bits of one raw draw.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub task_types: usize,
    pub machines: usize,
    pub jobs: usize,
    pub durations: RangeInclusive<Time>,
    pub blocks_per_job: RangeInclusive<usize>,
    pub tasks_per_block: RangeInclusive<usize>,
    pub incapable_probability: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Jobs made of exactly `tasks_per_job` single-task blocks, the shape of
    /// the legacy datasets.
    pub fn single_task_blocks(
        task_types: usize,
        machines: usize,
        jobs: usize,
        tasks_per_job: usize,
        durations: RangeInclusive<Time>,
        seed: u64,
    ) -> Self {
        GenConfig {
            task_types,
            machines,
            jobs,
            durations,
            blocks_per_job: tasks_per_job..=tasks_per_job,
            tasks_per_block: 1..=1,
            incapable_probability: 0.0,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), GenError> {
        for (what, n) in [
            ("task type count", self.task_types),
            ("machine count", self.machines),
            ("job count", self.jobs),
            ("blocks per job", *self.blocks_per_job.start()),
            ("tasks per block", *self.tasks_per_block.start()),
        ] {
            if n == 0 {
                return Err(GenError::ZeroCount { what });
            }
        }
        for r in [&self.blocks_per_job, &self.tasks_per_block] {
            if r.start() > r.end() {
                return Err(GenError::EmptyRange {
                    lo: *r.start() as i64,
                    hi: *r.end() as i64,
                });
            }
        }
        if self.durations.start() > self.durations.end() {
            return Err(GenError::EmptyRange {
                lo: *self.durations.start(),
                hi: *self.durations.end(),
            });
        }
        if *self.durations.start() < 1 {
            return Err(GenError::NonPositiveDuration(*self.durations.start()));
        }
        let p = self.incapable_probability;
        if !(0.0..1.0).contains(&p) {
            return Err(GenError::BadProbability(p));
        }
        Ok(())
    }
}

pub fn generate(config: &GenConfig) -> Result<Instance, GenError> {
    config.check()?;
    let mut rng = SplitMix64::new(config.seed);
    let (m, t) = (config.machines, config.task_types);
    let (lo, hi) = (*config.durations.start(), *config.durations.end());
    let p = config.incapable_probability;

    let draw_entry = |rng: &mut SplitMix64| -> Time {
        let d = rng.next_uniform(lo, hi).expect("checked");
        if p > 0.0 && rng.next_unit() < p {
            -d
        } else {
            d
        }
    };

    let mut rows: Vec<Vec<Time>> = (0..m)
        .map(|_| (0..t).map(|_| draw_entry(&mut rng)).collect())
        .collect();
    for col in 0..t {
        while rows.iter().all(|r| r[col] < 0) {
            for row in rows.iter_mut() {
                row[col] = draw_entry(&mut rng);
            }
        }
    }
    let matrix = TimeMatrix::from_rows(&rows).expect("dimensions are positive");

    let jobs = (0..config.jobs)
        .map(|_| {
            let f = rng.uniform_usize(&config.blocks_per_job);
            Job::new(
                (0..f)
                    .map(|_| {
                        let k = rng.uniform_usize(&config.tasks_per_block);
                        Block::new((0..k).map(|_| rng.uniform_usize(&(1..=t))).collect())
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(Instance::new(matrix, jobs))
}

/// How per-instance job shapes are drawn by [`GenRanges`].
#[derive(Debug, Clone, PartialEq)]
pub enum JobShape {
    /// One `K` per instance; every job is `K` single-task blocks.
    SingleTaskBlocks {
        tasks_per_job: RangeInclusive<usize>,
    },
    /// Block counts and block lengths drawn per job and per block.
    Blocks {
        blocks_per_job: RangeInclusive<usize>,
        tasks_per_block: RangeInclusive<usize>,
    },
}

/// Ranges from which whole instance configurations are drawn, one
/// configuration per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GenRanges {
    pub task_types: RangeInclusive<usize>,
    pub machines: RangeInclusive<usize>,
    pub jobs: RangeInclusive<usize>,
    pub durations: RangeInclusive<Time>,
    pub shape: JobShape,
    pub incapable_probability: f64,
}

impl GenRanges {
    /// Medium experiment: t, m, I <= 100, L <= 200, K <= 20, single-task blocks.
    pub fn medium() -> Self {
        GenRanges {
            task_types: 1..=100,
            machines: 1..=100,
            jobs: 1..=200,
            durations: 1..=100,
            shape: JobShape::SingleTaskBlocks {
                tasks_per_job: 1..=20,
            },
            incapable_probability: 0.0,
        }
    }

    /// Large experiment: t, m, I, L, K <= 1000, single-task blocks.
    pub fn large() -> Self {
        GenRanges {
            task_types: 1..=1000,
            machines: 1..=1000,
            jobs: 1..=1000,
            durations: 1..=1000,
            shape: JobShape::SingleTaskBlocks {
                tasks_per_job: 1..=1000,
            },
            incapable_probability: 0.0,
        }
    }

    /// The medium experiment scaled down to run in seconds: t, m <= 20,
    /// L <= 50, K <= 10, durations 1..=100.
    pub fn desk() -> Self {
        GenRanges {
            task_types: 1..=20,
            machines: 1..=20,
            jobs: 1..=50,
            durations: 1..=100,
            shape: JobShape::SingleTaskBlocks {
                tasks_per_job: 1..=10,
            },
            incapable_probability: 0.0,
        }
    }

    /// Small multi-task-block instances: t, m <= 8, L <= 40, durations
    /// 1..=50, 1-4 blocks of 1-3 tasks.
    pub fn mixed() -> Self {
        GenRanges {
            task_types: 1..=8,
            machines: 1..=8,
            jobs: 1..=40,
            durations: 1..=50,
            shape: JobShape::Blocks {
                blocks_per_job: 1..=4,
                tasks_per_block: 1..=3,
            },
            incapable_probability: 0.0,
        }
    }

    /// Instances small enough for the exhaustive optimum (usually at most
    /// 7 tasks, at most 3 machines).
    pub fn tiny() -> Self {
        GenRanges {
            task_types: 1..=3,
            machines: 1..=3,
            jobs: 1..=3,
            durations: 1..=9,
            shape: JobShape::Blocks {
                blocks_per_job: 1..=2,
                tasks_per_block: 1..=2,
            },
            incapable_probability: 0.0,
        }
    }

    /// Draws t, m, L and (for single-task shapes) K from `seed`, in that
    /// order; the instance seed is the next raw draw.
    pub fn draw(&self, seed: u64) -> Result<GenConfig, GenError> {
        for (what, r) in [
            ("task type count", &self.task_types),
            ("machine count", &self.machines),
            ("job count", &self.jobs),
        ] {
            if *r.start() == 0 {
                return Err(GenError::ZeroCount { what });
            }
            if r.start() > r.end() {
                return Err(GenError::EmptyRange {
                    lo: *r.start() as i64,
                    hi: *r.end() as i64,
                });
            }
        }
        let mut rng = SplitMix64::new(seed);
        let task_types = rng.uniform_usize(&self.task_types);
        let machines = rng.uniform_usize(&self.machines);
        let jobs = rng.uniform_usize(&self.jobs);
        let (blocks_per_job, tasks_per_block) = match &self.shape {
            JobShape::SingleTaskBlocks { tasks_per_job } => {
                if tasks_per_job.start() > tasks_per_job.end() {
                    return Err(GenError::EmptyRange {
                        lo: *tasks_per_job.start() as i64,
                        hi: *tasks_per_job.end() as i64,
                    });
                }
                let k = rng.uniform_usize(tasks_per_job);
                (k..=k, 1..=1)
            }
            JobShape::Blocks {
                blocks_per_job,
                tasks_per_block,
            } => (blocks_per_job.clone(), tasks_per_block.clone()),
        };
        let config = GenConfig {
            task_types,
            machines,
            jobs,
            durations: self.durations.clone(),
            blocks_per_job,
            tasks_per_block,
            incapable_probability: self.incapable_probability,
            seed: rng.next_u64(),
        };
        config.check()?;
        Ok(config)
    }
}
