//! Instances, jobs, blocks and the machine/task-type time matrix.
//!
//! All indices exposed by this module are 1-based: machines are `1..=m`,
//! task types are `1..=t`, and a task is addressed by `(job, block, pos)`.

use std::fmt;

use thiserror::Error;

/// Time in integer units. Schedules never produce negative values, but the
/// type is signed so that externally supplied data can be checked.
pub type Time = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("time matrix needs at least one machine and one task type")]
    EmptyMatrix,
    #[error("matrix row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("task type {task_type} is outside 1..={task_types}")]
    TaskTypeOutOfRange { task_type: usize, task_types: usize },
}

/// The `m x t` table of processing times. A positive entry is the time the
/// machine needs for that task type, a negative entry marks the machine as
/// incapable, and zero is forbidden (reported by [`Instance::validate`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeMatrix {
    machines: usize,
    task_types: usize,
    entries: Vec<Time>,
}

impl TimeMatrix {
    pub fn from_rows<R: AsRef<[Time]>>(rows: &[R]) -> Result<Self, ModelError> {
        let machines = rows.len();
        let task_types = rows.first().map_or(0, |r| r.as_ref().len());
        if machines == 0 || task_types == 0 {
            return Err(ModelError::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(machines * task_types);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != task_types {
                return Err(ModelError::RaggedRow {
                    row: i + 1,
                    expected: task_types,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(TimeMatrix {
            machines,
            task_types,
            entries,
        })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn task_types(&self) -> usize {
        self.task_types
    }

    /// Raw entry for `machine` and `task_type` (both 1-based).
    ///
    /// Panics if either index is out of range.
    pub fn entry(&self, machine: usize, task_type: usize) -> Time {
        assert!(
            (1..=self.machines).contains(&machine) && (1..=self.task_types).contains(&task_type),
            "matrix index ({machine}, {task_type}) out of range"
        );
        self.entries[(machine - 1) * self.task_types + (task_type - 1)]
    }

    /// Processing time if the machine can handle the type, `None` otherwise
    /// (including out-of-range indices).
    pub fn duration(&self, machine: usize, task_type: usize) -> Option<Time> {
        if !(1..=self.machines).contains(&machine) || !(1..=self.task_types).contains(&task_type) {
            return None;
        }
        let e = self.entry(machine, task_type);
        (e > 0).then_some(e)
    }

    pub fn row(&self, machine: usize) -> &[Time] {
        let start = (machine - 1) * self.task_types;
        &self.entries[start..start + self.task_types]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Time]> {
        self.entries.chunks(self.task_types)
    }

    /// Machines able to process `task_type`, in increasing index order.
    pub fn capable_machines(&self, task_type: usize) -> Result<Vec<usize>, ModelError> {
        if !(1..=self.task_types).contains(&task_type) {
            return Err(ModelError::TaskTypeOutOfRange {
                task_type,
                task_types: self.task_types,
            });
        }
        Ok((1..=self.machines)
            .filter(|&i| self.entry(i, task_type) > 0)
            .collect())
    }

    /// Shortest processing time of `task_type` over capable machines.
    pub fn min_duration(&self, task_type: usize) -> Option<Time> {
        (1..=self.machines)
            .filter_map(|i| self.duration(i, task_type))
            .min()
    }
}

/// Tasks that may run in parallel; the next block of the same job waits for
/// all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    tasks: Vec<usize>,
}

impl Block {
    pub fn new(tasks: Vec<usize>) -> Self {
        Block { tasks }
    }

    /// Task types of this block in arrival order.
    pub fn tasks(&self) -> &[usize] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

impl From<Vec<usize>> for Block {
    fn from(tasks: Vec<usize>) -> Self {
        Block::new(tasks)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    blocks: Vec<Block>,
}

impl Job {
    pub fn new(blocks: Vec<Block>) -> Self {
        Job { blocks }
    }

    /// A job made of sequential single-task blocks, as in the legacy
    /// dataset format.
    pub fn chain(task_types: &[usize]) -> Self {
        Job::new(task_types.iter().map(|&t| Block::new(vec![t])).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Total number of tasks over all blocks.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }
}

/// Coordinates `(job, block, pos)` of a task, all 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskRef {
    pub job: usize,
    pub block: usize,
    pub pos: usize,
}

impl TaskRef {
    pub fn new(job: usize, block: usize, pos: usize) -> Self {
        TaskRef { job, block, pos }
    }
}

impl fmt::Display for TaskRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}.{}.{}", self.job, self.block, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    ZeroEntry { machine: usize, task_type: usize },
    UnsolvableType { task_type: usize },
    BadTaskIndex { task: TaskRef, task_type: usize },
    EmptyBlock { job: usize, block: usize },
    EmptyJob { job: usize },
    NoJobs,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroEntry { machine, task_type } => {
                write!(f, "ZERO_ENTRY({machine},{task_type})")
            }
            Violation::UnsolvableType { task_type } => write!(f, "UNSOLVABLE_TYPE({task_type})"),
            Violation::BadTaskIndex { task, task_type } => write!(
                f,
                "BAD_TASK_INDEX({},{},{}) type {task_type}",
                task.job, task.block, task.pos
            ),
            Violation::EmptyBlock { job, block } => write!(f, "EMPTY_BLOCK({job},{block})"),
            Violation::EmptyJob { job } => write!(f, "EMPTY_JOB({job})"),
            Violation::NoJobs => write!(f, "NO_JOBS"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    /// A task type no machine can process, but which no job references.
    UnusedUnsolvableType { task_type: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnusedUnsolvableType { task_type } => {
                write!(
                    f,
                    "task type {task_type} has no capable machine but is never used"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    matrix: TimeMatrix,
    jobs: Vec<Job>,
}

impl Instance {
    /// Builds an instance without checking it; see [`Instance::validate`].
    pub fn new(matrix: TimeMatrix, jobs: Vec<Job>) -> Self {
        Instance { matrix, jobs }
    }

    pub fn matrix(&self) -> &TimeMatrix {
        &self.matrix
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, job: usize) -> Option<&Job> {
        job.checked_sub(1).and_then(|j| self.jobs.get(j))
    }

    pub fn machines(&self) -> usize {
        self.matrix.machines
    }

    pub fn task_types(&self) -> usize {
        self.matrix.task_types
    }

    pub fn task_count(&self) -> usize {
        self.jobs.iter().map(Job::size).sum()
    }

    /// Task type stored at `task`, if the coordinates exist.
    pub fn task_type(&self, task: TaskRef) -> Option<usize> {
        let block = self.job(task.job)?.blocks.get(task.block.checked_sub(1)?)?;
        block.tasks.get(task.pos.checked_sub(1)?).copied()
    }

    /// Every task with its type, in stream order: jobs in order, blocks in
    /// order within a job, tasks in order within a block.
    pub fn tasks(&self) -> impl Iterator<Item = (TaskRef, usize)> + '_ {
        self.jobs.iter().enumerate().flat_map(|(j, job)| {
            job.blocks.iter().enumerate().flat_map(move |(b, block)| {
                block
                    .tasks
                    .iter()
                    .enumerate()
                    .map(move |(k, &ty)| (TaskRef::new(j + 1, b + 1, k + 1), ty))
            })
        })
    }

    pub fn validate(&self) -> Validation {
        let mut out = Validation::default();
        let m = &self.matrix;
        for i in 1..=m.machines {
            for ty in 1..=m.task_types {
                if m.entry(i, ty) == 0 {
                    out.violations.push(Violation::ZeroEntry {
                        machine: i,
                        task_type: ty,
                    });
                }
            }
        }

        if self.jobs.is_empty() {
            out.violations.push(Violation::NoJobs);
        }
        let mut referenced = vec![false; m.task_types + 1];
        for (j, job) in self.jobs.iter().enumerate() {
            if job.blocks.is_empty() {
                out.violations.push(Violation::EmptyJob { job: j + 1 });
            }
            for (b, block) in job.blocks.iter().enumerate() {
                if block.tasks.is_empty() {
                    out.violations.push(Violation::EmptyBlock {
                        job: j + 1,
                        block: b + 1,
                    });
                }
                for (k, &ty) in block.tasks.iter().enumerate() {
                    if (1..=m.task_types).contains(&ty) {
                        referenced[ty] = true;
                    } else {
                        out.violations.push(Violation::BadTaskIndex {
                            task: TaskRef::new(j + 1, b + 1, k + 1),
                            task_type: ty,
                        });
                    }
                }
            }
        }

        for (ty, &used) in referenced.iter().enumerate().skip(1) {
            if m.min_duration(ty).is_none() {
                if used {
                    out.violations
                        .push(Violation::UnsolvableType { task_type: ty });
                } else {
                    out.warnings
                        .push(Warning::UnusedUnsolvableType { task_type: ty });
                }
            }
        }
        out
    }
}
