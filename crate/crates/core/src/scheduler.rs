//! Online greedy scheduling.
//!
//! Tasks arrive one at a time. Each one is placed on a machine and given a
//! start time as soon as it arrives, and that decision is never revisited.
//! The engine only knows the time matrix and the tasks seen so far.
//!
//! Three policies choose the machine:
//!
//! * [`Variant::Ect`]: the machine that can *finish* the task earliest.
//! * [`Variant::Est`]: the machine that can *start* the task earliest.
//! * [`Variant::Spt`]: the machine with the shortest processing time.
//!
//! Start times always come from [`MachineTimeline::earliest_fit`], so a task
//! may fill an idle gap left between earlier reservations. Ties go to the
//! lowest machine index.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Instance, TaskRef, Time, TimeMatrix};
use crate::timeline::{Interval, MachineTimeline, TimelineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Earliest completion time.
    Ect,
    /// Earliest start time.
    Est,
    /// Shortest processing time.
    Spt,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Ect, Variant::Est, Variant::Spt];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ect => "ect",
            Variant::Est => "est",
            Variant::Spt => "spt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown variant `{0}` (expected ect, est, spt or 3, 4, 5)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    /// Accepts the policy names and the historical numbering 3/4/5.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ect" | "3" => Ok(Variant::Ect),
            "est" | "4" => Ok(Variant::Est),
            "spt" | "5" => Ok(Variant::Spt),
            _ => Err(UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchedulerError {
    #[error("NO_CAPABLE_MACHINE({task_type}): no machine can process task type {task_type}")]
    NoCapableMachine { task_type: usize },
    #[error("task {task} arrived out of stream order (job is at block {current_block})")]
    OutOfOrder { task: TaskRef, current_block: usize },
    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

/// A final placement decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub task: TaskRef,
    pub task_type: usize,
    pub machine: usize,
    pub start: Time,
    pub end: Time,
}

impl Assignment {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    machines: usize,
    assignments: Vec<Assignment>,
    makespan: Time,
}

impl Schedule {
    pub fn new(machines: usize, assignments: Vec<Assignment>) -> Self {
        let makespan = assignments.iter().map(|a| a.end).max().unwrap_or(0).max(0);
        Schedule {
            machines,
            assignments,
            makespan,
        }
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    /// Assignments in the order the tasks arrived.
    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Assignments on `machine`, sorted by start time.
    pub fn on_machine(&self, machine: usize) -> Vec<&Assignment> {
        let mut v: Vec<_> = self
            .assignments
            .iter()
            .filter(|a| a.machine == machine)
            .collect();
        v.sort_by_key(|a| (a.start, a.end));
        v
    }
}

/// A machine and start time proposed by a policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub machine: usize,
    pub start: Time,
}

#[derive(Debug, Clone, Copy, Default)]
struct JobProgress {
    block: usize,
    /// Latest end over the previous block: the current block's ready time.
    ready: Time,
    /// Latest end over the current block so far.
    current_end: Time,
}

/// State of one online run. Jobs are tracked by index, so tasks of different
/// jobs may be interleaved as long as each job's blocks arrive in order.
#[derive(Debug, Clone)]
pub struct OnlineScheduler<'m> {
    matrix: &'m TimeMatrix,
    variant: Variant,
    timelines: Vec<MachineTimeline>,
    progress: HashMap<usize, JobProgress>,
    assignments: Vec<Assignment>,
}

impl<'m> OnlineScheduler<'m> {
    pub fn new(matrix: &'m TimeMatrix, variant: Variant) -> Self {
        OnlineScheduler {
            matrix,
            variant,
            timelines: vec![MachineTimeline::new(); matrix.machines()],
            progress: HashMap::new(),
            assignments: Vec::new(),
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn timeline(&self, machine: usize) -> &MachineTimeline {
        &self.timelines[machine - 1]
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    /// Ready time of the job's current block: 0 for the first block (or a
    /// job not yet seen), otherwise the latest end in the previous block.
    pub fn block_ready(&self, job: usize) -> Time {
        self.progress.get(&job).map_or(0, |p| p.ready)
    }

    fn ready_for(&self, task: TaskRef) -> Result<Time, SchedulerError> {
        match self.progress.get(&task.job) {
            None if task.block == 1 => Ok(0),
            None => Err(SchedulerError::OutOfOrder {
                task,
                current_block: 0,
            }),
            Some(p) if task.block == p.block => Ok(p.ready),
            Some(p) if task.block == p.block + 1 => Ok(p.current_end),
            Some(p) => Err(SchedulerError::OutOfOrder {
                task,
                current_block: p.block,
            }),
        }
    }

    /// Capable machines with their processing time and earliest-fit start.
    fn candidates(
        &self,
        task_type: usize,
        ready: Time,
    ) -> impl Iterator<Item = Result<(usize, Time, Time), TimelineError>> + '_ {
        (1..=self.matrix.machines()).filter_map(move |i| {
            let dur = self.matrix.duration(i, task_type)?;
            Some(
                self.timelines[i - 1]
                    .earliest_fit(ready, dur)
                    .map(|d| (i, dur, d)),
            )
        })
    }

    /// Minimizes `key(machine, duration, start)`; the strict comparison keeps
    /// the lowest machine index on ties.
    fn argmin<K: Ord>(
        &self,
        task_type: usize,
        ready: Time,
        key: impl Fn(usize, Time, Time) -> K,
    ) -> Result<Choice, SchedulerError> {
        let mut best: Option<(K, Choice)> = None;
        for c in self.candidates(task_type, ready) {
            let (machine, dur, start) = c?;
            let k = key(machine, dur, start);
            if best.as_ref().is_none_or(|(bk, _)| k < *bk) {
                best = Some((k, Choice { machine, start }));
            }
        }
        best.map(|(_, c)| c)
            .ok_or(SchedulerError::NoCapableMachine { task_type })
    }

    pub fn choose_ect(&self, task_type: usize, ready: Time) -> Result<Choice, SchedulerError> {
        self.argmin(task_type, ready, |_, dur, start| start + dur)
    }

    pub fn choose_est(&self, task_type: usize, ready: Time) -> Result<Choice, SchedulerError> {
        self.argmin(task_type, ready, |_, _, start| start)
    }

    pub fn choose_spt(&self, task_type: usize, ready: Time) -> Result<Choice, SchedulerError> {
        // Machine choice depends on the duration only; the start is still
        // the earliest fit on that machine.
        self.argmin(task_type, ready, |_, dur, _| dur)
    }

    pub fn choose(&self, task_type: usize, ready: Time) -> Result<Choice, SchedulerError> {
        match self.variant {
            Variant::Ect => self.choose_ect(task_type, ready),
            Variant::Est => self.choose_est(task_type, ready),
            Variant::Spt => self.choose_spt(task_type, ready),
        }
    }

    /// Places the next task of the stream and commits the decision.
    pub fn schedule_task(
        &mut self,
        task: TaskRef,
        task_type: usize,
    ) -> Result<Assignment, SchedulerError> {
        let ready = self.ready_for(task)?;
        let choice = self.choose(task_type, ready)?;
        let dur = self
            .matrix
            .duration(choice.machine, task_type)
            .expect("chosen machine is capable");
        let iv = self.timelines[choice.machine - 1].reserve(choice.start, dur)?;

        let p = self.progress.entry(task.job).or_default();
        if task.block != p.block {
            // First task of a new block: the old current block is now finished.
            p.ready = p.current_end;
            p.current_end = 0;
            p.block = task.block;
        }
        p.current_end = p.current_end.max(iv.end);

        let a = Assignment {
            task,
            task_type,
            machine: choice.machine,
            start: iv.start,
            end: iv.end,
        };
        self.assignments.push(a);
        Ok(a)
    }

    pub fn into_schedule(self) -> Schedule {
        Schedule::new(self.matrix.machines(), self.assignments)
    }
}

/// Scheduling stopped at `task`; `partial` holds everything placed before it.
#[derive(Debug, Clone, Error)]
#[error("scheduling aborted at {task}: {error}")]
pub struct RunError {
    pub task: TaskRef,
    pub partial: Schedule,
    #[source]
    pub error: SchedulerError,
}

/// Feeds every task of `instance` to a fresh online scheduler in stream order.
pub fn run_stream(instance: &Instance, variant: Variant) -> Result<Schedule, RunError> {
    run_tasks(instance.matrix(), instance.tasks(), variant)
}

/// Like [`run_stream`], for an arbitrary arrival sequence.
pub fn run_tasks(
    matrix: &TimeMatrix,
    tasks: impl IntoIterator<Item = (TaskRef, usize)>,
    variant: Variant,
) -> Result<Schedule, RunError> {
    let mut engine = OnlineScheduler::new(matrix, variant);
    for (task, ty) in tasks {
        if let Err(error) = engine.schedule_task(task, ty) {
            return Err(RunError {
                task,
                partial: engine.into_schedule(),
                error,
            });
        }
    }
    Ok(engine.into_schedule())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowerBounds {
    /// Longest job when every task runs on its fastest machine and each
    /// block takes as long as its slowest task.
    pub path: Time,
    /// Total fastest-machine work spread evenly over all machines.
    pub load: Time,
}

impl LowerBounds {
    pub fn max(&self) -> Time {
        self.path.max(self.load)
    }
}

pub fn makespan_lower_bounds(instance: &Instance) -> Result<LowerBounds, SchedulerError> {
    let matrix = instance.matrix();
    let fastest = |ty: usize| {
        matrix
            .min_duration(ty)
            .ok_or(SchedulerError::NoCapableMachine { task_type: ty })
    };
    let mut path = 0;
    let mut work = 0;
    for job in instance.jobs() {
        let mut length = 0;
        for block in job.blocks() {
            let mut longest = 0;
            for &ty in block.tasks() {
                let d = fastest(ty)?;
                longest = longest.max(d);
                work += d;
            }
            length += longest;
        }
        path = path.max(length);
    }
    let m = matrix.machines() as Time;
    Ok(LowerBounds {
        path,
        load: (work + m - 1) / m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{f1, f2, ls4};
    use crate::model::{Block, Job};

    fn a(
        job: usize,
        block: usize,
        pos: usize,
        ty: usize,
        m: usize,
        s: Time,
        e: Time,
    ) -> Assignment {
        Assignment {
            task: TaskRef::new(job, block, pos),
            task_type: ty,
            machine: m,
            start: s,
            end: e,
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("ect".parse(), Ok(Variant::Ect));
        assert_eq!("EST".parse(), Ok(Variant::Est));
        assert_eq!("5".parse(), Ok(Variant::Spt));
        assert_eq!("3".parse(), Ok(Variant::Ect));
        assert_eq!("4".parse(), Ok(Variant::Est));
        assert!("lpt".parse::<Variant>().is_err());
    }

    #[test]
    fn block_ready_is_zero_for_first_block() {
        let inst = ls4();
        let s = OnlineScheduler::new(inst.matrix(), Variant::Ect);
        assert_eq!(s.block_ready(3), 0);
    }

    #[test]
    fn block_ready_is_latest_end_of_previous_block() {
        // Block 1 tasks end at 4 (M1) and 7 (M2 beats M1's 8).
        let m = TimeMatrix::from_rows(&[[4], [7]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Ect);
        assert_eq!(s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap().end, 4);
        assert_eq!(s.schedule_task(TaskRef::new(1, 1, 2), 1).unwrap().end, 7);
        assert_eq!(s.block_ready(1), 0);
        let next = s.schedule_task(TaskRef::new(1, 2, 1), 1).unwrap();
        assert_eq!(s.block_ready(1), 7);
        assert!(next.start >= 7);

        let m = TimeMatrix::from_rows(&[[2]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Ect);
        s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap();
        s.schedule_task(TaskRef::new(1, 2, 1), 1).unwrap();
        assert_eq!(s.block_ready(1), 2);
    }

    #[test]
    fn no_cross_job_constraint() {
        let m = TimeMatrix::from_rows(&[[3], [3]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Ect);
        s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap();
        s.schedule_task(TaskRef::new(1, 2, 1), 1).unwrap();
        let other = s.schedule_task(TaskRef::new(2, 1, 1), 1).unwrap();
        assert_eq!((other.machine, other.start), (2, 0));
    }

    #[test]
    fn ect_choices_on_f1() {
        let inst = f1();
        let mut s = OnlineScheduler::new(inst.matrix(), Variant::Ect);
        assert_eq!(
            s.choose_ect(1, 0).unwrap(),
            Choice {
                machine: 1,
                start: 0
            }
        );
        s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap();
        assert_eq!(
            s.choose_ect(1, 0).unwrap(),
            Choice {
                machine: 1,
                start: 5
            }
        );
    }

    #[test]
    fn est_choices() {
        let inst = f1();
        let mut s = OnlineScheduler::new(inst.matrix(), Variant::Est);
        assert_eq!(
            s.choose_est(1, 0).unwrap(),
            Choice {
                machine: 1,
                start: 0
            }
        );
        s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap();
        assert_eq!(
            s.choose_est(1, 0).unwrap(),
            Choice {
                machine: 2,
                start: 0
            }
        );
        let second = s.schedule_task(TaskRef::new(1, 1, 2), 1).unwrap();
        assert_eq!(second, a(1, 1, 2, 1, 2, 0, 100));
    }

    #[test]
    fn est_prefers_earlier_start_over_index() {
        // M1 busy [0,10), M2 busy [0,1).
        let m = TimeMatrix::from_rows(&[[10, 50], [1, 50]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Est);
        s.timelines[0].reserve(0, 10).unwrap();
        s.timelines[1].reserve(0, 1).unwrap();
        assert_eq!(
            s.choose_est(2, 0).unwrap(),
            Choice {
                machine: 2,
                start: 1
            }
        );
    }

    #[test]
    fn spt_choices() {
        let m = TimeMatrix::from_rows(&[[1, 10], [2, 2]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Spt);
        for j in 1..=5 {
            let got = s.schedule_task(TaskRef::new(j, 1, 1), 2).unwrap();
            assert_eq!(got.machine, 2);
        }
        let m = TimeMatrix::from_rows(&[[-1], [7]]).unwrap();
        let s = OnlineScheduler::new(&m, Variant::Spt);
        assert_eq!(s.choose_spt(1, 0).unwrap().machine, 2);
        let m = TimeMatrix::from_rows(&[[3], [3]]).unwrap();
        let s = OnlineScheduler::new(&m, Variant::Spt);
        assert_eq!(s.choose_spt(1, 0).unwrap().machine, 1);
    }

    #[test]
    fn spt_uses_earliest_fit_on_its_machine() {
        let m = TimeMatrix::from_rows(&[[3, 1]]).unwrap();
        let mut s = OnlineScheduler::new(&m, Variant::Spt);
        s.timelines[0].reserve(0, 2).unwrap();
        s.timelines[0].reserve(5, 2).unwrap();
        assert_eq!(
            s.choose_spt(1, 0).unwrap(),
            Choice {
                machine: 1,
                start: 2
            }
        );
        assert_eq!(
            s.choose_spt(1, 3).unwrap(),
            Choice {
                machine: 1,
                start: 7
            }
        );
    }

    #[test]
    fn no_capable_machine() {
        let m = TimeMatrix::from_rows(&[[-1, 2]]).unwrap();
        let s = OnlineScheduler::new(&m, Variant::Ect);
        for v in Variant::ALL {
            let s = OnlineScheduler {
                variant: v,
                ..s.clone()
            };
            assert_eq!(
                s.choose(1, 0),
                Err(SchedulerError::NoCapableMachine { task_type: 1 })
            );
        }
    }

    #[test]
    fn f2_schedule_task() {
        let inst = f2();
        let mut s = OnlineScheduler::new(inst.matrix(), Variant::Ect);
        assert_eq!(
            s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap(),
            a(1, 1, 1, 1, 1, 0, 2)
        );
        assert_eq!(
            s.schedule_task(TaskRef::new(1, 2, 1), 1).unwrap(),
            a(1, 2, 1, 1, 1, 2, 4)
        );
    }

    #[test]
    fn run_stream_fixtures() {
        for v in Variant::ALL {
            assert_eq!(run_stream(&f2(), v).unwrap().makespan(), 4);
        }
        assert_eq!(run_stream(&f1(), Variant::Est).unwrap().makespan(), 100);
        assert_eq!(run_stream(&f1(), Variant::Ect).unwrap().makespan(), 10);
        assert_eq!(run_stream(&f1(), Variant::Spt).unwrap().makespan(), 10);
    }

    #[test]
    fn ls4_golden() {
        // Frozen from an independent simulation of the same rules.
        let expected = [
            a(1, 1, 1, 1, 1, 0, 2),
            a(1, 2, 1, 2, 2, 2, 6),
            a(2, 1, 1, 3, 1, 2, 3),
            a(2, 2, 1, 4, 3, 3, 11),
            a(3, 1, 1, 1, 1, 3, 5),
            a(3, 2, 1, 3, 1, 5, 6),
            a(4, 1, 1, 2, 2, 6, 10),
            a(4, 2, 1, 3, 1, 10, 11),
            a(5, 1, 1, 3, 1, 6, 7),
            a(5, 2, 1, 3, 1, 7, 8),
            a(6, 1, 1, 2, 2, 10, 14),
            a(6, 2, 1, 6, 2, 14, 15),
            a(7, 1, 1, 5, 3, 0, 3),
            a(7, 2, 1, 2, 1, 11, 16),
            a(8, 1, 1, 3, 1, 8, 9),
            a(8, 2, 1, 5, 3, 11, 14),
            a(9, 1, 1, 1, 1, 16, 18),
            a(9, 2, 1, 6, 2, 18, 19),
            a(10, 1, 1, 4, 3, 14, 22),
            a(10, 2, 1, 8, 2, 22, 23),
        ];
        let s = run_stream(&ls4(), Variant::Ect).unwrap();
        assert_eq!(s.assignments(), &expected);
        assert_eq!(s.makespan(), 23);
        assert_eq!(run_stream(&ls4(), Variant::Est).unwrap().makespan(), 40);
        assert_eq!(run_stream(&ls4(), Variant::Spt).unwrap().makespan(), 35);
    }

    #[test]
    fn ls4_job9_tie_goes_to_lowest_index() {
        let inst = ls4();
        let tasks: Vec<_> = inst.tasks().take_while(|(t, _)| t.job < 9).collect();
        let mut s = OnlineScheduler::new(inst.matrix(), Variant::Ect);
        for (t, ty) in tasks {
            s.schedule_task(t, ty).unwrap();
        }
        // All three machines can finish type 1 at 18.
        for (i, d) in [(1, 16), (2, 15), (3, 14)] {
            let dur = inst.matrix().duration(i, 1).unwrap();
            assert_eq!(s.timeline(i).earliest_fit(0, dur).unwrap() + dur, 18);
            assert_eq!(s.timeline(i).earliest_fit(0, dur).unwrap(), d);
        }
        assert_eq!(
            s.choose_ect(1, 0).unwrap(),
            Choice {
                machine: 1,
                start: 16
            }
        );
    }

    #[test]
    fn out_of_order_blocks_are_rejected() {
        let inst = f2();
        let mut s = OnlineScheduler::new(inst.matrix(), Variant::Ect);
        assert!(matches!(
            s.schedule_task(TaskRef::new(1, 2, 1), 1),
            Err(SchedulerError::OutOfOrder { .. })
        ));
        s.schedule_task(TaskRef::new(1, 1, 1), 1).unwrap();
        assert!(s.schedule_task(TaskRef::new(1, 3, 1), 1).is_err());
    }

    #[test]
    fn interleaved_jobs_match_canonical_order() {
        let m = TimeMatrix::from_rows(&[[2, 3], [3, 1]]).unwrap();
        let inst = Instance::new(
            m.clone(),
            vec![
                Job::new(vec![Block::new(vec![1, 2]), Block::new(vec![1])]),
                Job::new(vec![Block::new(vec![2]), Block::new(vec![2, 1])]),
            ],
        );
        let canonical = run_stream(&inst, Variant::Ect).unwrap();
        let mut tasks: Vec<_> = inst.tasks().collect();
        // Move job 2's first block ahead of job 1's second block.
        tasks.swap(2, 3);
        let interleaved = run_tasks(&m, tasks, Variant::Ect).unwrap();
        assert_eq!(
            interleaved.assignments().len(),
            canonical.assignments().len()
        );
        for a in interleaved.assignments() {
            let block_prev_end = interleaved
                .assignments()
                .iter()
                .filter(|b| b.task.job == a.task.job && b.task.block + 1 == a.task.block)
                .map(|b| b.end)
                .max()
                .unwrap_or(0);
            assert!(a.start >= block_prev_end);
        }
    }

    #[test]
    fn run_stream_reports_partial_schedule() {
        let inst = Instance::new(
            TimeMatrix::from_rows(&[[2, -1]]).unwrap(),
            vec![Job::chain(&[1, 1, 2])],
        );
        let err = run_stream(&inst, Variant::Ect).unwrap_err();
        assert_eq!(err.task, TaskRef::new(1, 3, 1));
        assert_eq!(err.partial.assignments().len(), 2);
        assert_eq!(err.error, SchedulerError::NoCapableMachine { task_type: 2 });
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(
            makespan_lower_bounds(&f1()).unwrap(),
            LowerBounds { path: 5, load: 5 }
        );
        assert_eq!(
            makespan_lower_bounds(&f2()).unwrap(),
            LowerBounds { path: 4, load: 4 }
        );
        let single = Instance::new(
            TimeMatrix::from_rows(&[[7]]).unwrap(),
            vec![Job::chain(&[1])],
        );
        assert_eq!(
            makespan_lower_bounds(&single).unwrap(),
            LowerBounds { path: 7, load: 7 }
        );
    }

    #[test]
    fn empty_schedule_has_zero_makespan() {
        assert_eq!(Schedule::new(3, vec![]).makespan(), 0);
    }
}
