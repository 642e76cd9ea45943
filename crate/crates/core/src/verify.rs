//! Schedule validation and an exhaustive offline optimum for tiny instances.
//!
//! Nothing here goes through the scheduler's timeline code. The validator
//! rebuilds every check from the raw assignments so that it catches engine
//! bugs instead of repeating them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{Instance, TaskRef, Time};
use crate::scheduler::{Assignment, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    MachineOverlap,
    Precedence,
    WrongDuration,
    IncapableMachine,
    NegativeStart,
    MissingTask,
    DuplicateTask,
    /// The assignment names a task that is not in the instance, or gives it
    /// a different task type.
    UnknownTask,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            ViolationKind::MachineOverlap => "MACHINE_OVERLAP",
            ViolationKind::Precedence => "PRECEDENCE",
            ViolationKind::WrongDuration => "WRONG_DURATION",
            ViolationKind::IncapableMachine => "INCAPABLE_MACHINE",
            ViolationKind::NegativeStart => "NEGATIVE_START",
            ViolationKind::MissingTask => "MISSING_TASK",
            ViolationKind::DuplicateTask => "DUPLICATE_TASK",
            ViolationKind::UnknownTask => "UNKNOWN_TASK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleViolation {
    pub kind: ViolationKind,
    pub task: TaskRef,
    /// Second task involved (overlaps, precedence predecessor).
    pub other: Option<TaskRef>,
    pub machine: Option<usize>,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.code(), self.task)?;
        if let Some(o) = self.other {
            write!(f, " vs {o}")?;
        }
        if let Some(m) = self.machine {
            write!(f, " on M{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<ScheduleViolation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, task: TaskRef) -> &mut ScheduleViolation {
        self.violations.push(ScheduleViolation {
            kind,
            task,
            other: None,
            machine: None,
        });
        self.violations.last_mut().unwrap()
    }
}

pub fn check_schedule(instance: &Instance, schedule: &Schedule) -> ViolationReport {
    use ViolationKind::*;
    let mut report = ViolationReport::default();
    let matrix = instance.matrix();

    let expected: BTreeMap<TaskRef, usize> = instance.tasks().collect();
    let mut seen: HashMap<TaskRef, usize> = HashMap::new();
    for a in schedule.assignments() {
        *seen.entry(a.task).or_default() += 1;
    }
    for &task in expected.keys() {
        match seen.get(&task).copied().unwrap_or(0) {
            0 => {
                report.push(MissingTask, task);
            }
            1 => {}
            _ => {
                report.push(DuplicateTask, task);
            }
        }
    }

    for a in schedule.assignments() {
        let Some(&ty) = expected.get(&a.task) else {
            report.push(UnknownTask, a.task);
            continue;
        };
        if ty != a.task_type {
            report.push(UnknownTask, a.task).machine = Some(a.machine);
        }
        if a.start < 0 {
            report.push(NegativeStart, a.task);
        }
        let in_range = a.machine >= 1 && a.machine <= matrix.machines();
        let entry = if in_range {
            matrix.entry(a.machine, ty)
        } else {
            -1
        };
        if entry <= 0 {
            report.push(IncapableMachine, a.task).machine = Some(a.machine);
        } else if a.end - a.start != entry {
            report.push(WrongDuration, a.task).machine = Some(a.machine);
        }
    }

    // Machine exclusivity: sort each machine's intervals and compare every
    // interval against the running maximum end.
    let mut per_machine: BTreeMap<usize, Vec<&Assignment>> = BTreeMap::new();
    for a in schedule.assignments() {
        per_machine.entry(a.machine).or_default().push(a);
    }
    for (&machine, list) in per_machine.iter_mut() {
        list.sort_by_key(|a| (a.start, a.end, a.task));
        let mut latest: Option<&Assignment> = None;
        for &a in list.iter() {
            if let Some(prev) = latest {
                if a.start < prev.end && a.end > a.start && prev.end > prev.start {
                    let v = report.push(MachineOverlap, a.task);
                    v.other = Some(prev.task);
                    v.machine = Some(machine);
                }
            }
            if latest.is_none_or(|p| a.end > p.end) {
                latest = Some(a);
            }
        }
    }

    // Block precedence within each job.
    let mut block_end: HashMap<(usize, usize), (Time, TaskRef)> = HashMap::new();
    for a in schedule.assignments() {
        let e = block_end
            .entry((a.task.job, a.task.block))
            .or_insert((Time::MIN, a.task));
        if a.end > e.0 {
            *e = (a.end, a.task);
        }
    }
    for a in schedule.assignments() {
        if a.task.block < 2 {
            continue;
        }
        if let Some(&(end, pred)) = block_end.get(&(a.task.job, a.task.block - 1)) {
            if a.start < end {
                report.push(Precedence, a.task).other = Some(pred);
            }
        }
    }
    report
}

/// Idle time per machine: the span up to the machine's last end minus the
/// time it spends working. Machines without tasks report 0.
pub fn idle_per_machine(schedule: &Schedule) -> Vec<Time> {
    let mut horizon = vec![0; schedule.machines()];
    let mut busy = vec![0; schedule.machines()];
    for a in schedule.assignments() {
        if let Some(i) = a.machine.checked_sub(1).filter(|&i| i < horizon.len()) {
            horizon[i] = horizon[i].max(a.end);
            busy[i] += a.end - a.start;
        }
    }
    horizon.iter().zip(&busy).map(|(h, b)| h - b).collect()
}

pub fn idle_time(schedule: &Schedule) -> Time {
    idle_per_machine(schedule).iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptLimits {
    pub max_tasks: usize,
    pub max_machines: usize,
}

impl Default for OptLimits {
    fn default() -> Self {
        OptLimits {
            max_tasks: 7,
            max_machines: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptError {
    #[error("TOO_LARGE: {tasks} tasks on {machines} machines exceeds limits of {max_tasks} tasks / {max_machines} machines")]
    TooLarge {
        tasks: usize,
        machines: usize,
        max_tasks: usize,
        max_machines: usize,
    },
    #[error("UNSOLVABLE_TYPE({task_type}): no machine can process task type {task_type}")]
    UnsolvableType { task_type: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub opt_makespan: Time,
    pub witness: Schedule,
    /// Number of (machine assignment, per-machine order) combinations tried.
    pub explored: u64,
}

/// Exact minimum makespan by exhaustive enumeration.
///
/// Every mapping of tasks to capable machines is tried together with every
/// order of the tasks on each machine. For a fixed mapping and order the
/// left-shifted schedule is optimal, so earliest starts come from a
/// longest-path pass over block edges and machine-sequence edges.
/// Combinations whose precedence graph has a cycle are skipped.
///
/// Ties keep the first combination found, i.e. the lexicographically
/// smallest machine vector in stream order.
pub fn brute_force_opt(instance: &Instance, limits: OptLimits) -> Result<OptResult, OptError> {
    let matrix = instance.matrix();
    let tasks: Vec<(TaskRef, usize)> = instance.tasks().collect();
    let n = tasks.len();
    if n > limits.max_tasks || matrix.machines() > limits.max_machines {
        return Err(OptError::TooLarge {
            tasks: n,
            machines: matrix.machines(),
            max_tasks: limits.max_tasks,
            max_machines: limits.max_machines,
        });
    }

    let options: Vec<Vec<(usize, Time)>> = tasks
        .iter()
        .map(|&(_, ty)| {
            let opts: Vec<_> = (1..=matrix.machines())
                .filter_map(|i| {
                    let e = matrix.entry(i, ty);
                    (e > 0).then_some((i, e))
                })
                .collect();
            if opts.is_empty() {
                Err(OptError::UnsolvableType { task_type: ty })
            } else {
                Ok(opts)
            }
        })
        .collect::<Result<_, _>>()?;

    // Block edges: every task of block b precedes every task of block b+1.
    let mut block_preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, (tv, _)) in tasks.iter().enumerate() {
        for (u, (tu, _)) in tasks.iter().enumerate() {
            if tu.job == tv.job && tu.block + 1 == tv.block {
                block_preds[v].push(u);
            }
        }
    }

    let mut search = Search {
        n,
        machines: matrix.machines(),
        block_preds: &block_preds,
        best: None,
        explored: 0,
    };
    let mut choice = vec![0usize; n];
    loop {
        let mapping: Vec<(usize, Time)> = choice
            .iter()
            .enumerate()
            .map(|(t, &c)| options[t][c])
            .collect();
        search.try_mapping(&mapping);

        // Odometer increment, last task fastest, so mappings come out in
        // lexicographic order of their machine vectors.
        let mut t = n;
        loop {
            if t == 0 {
                let (opt, starts, mapping) = search.best.expect("at least one acyclic combination");
                let witness = Schedule::new(
                    matrix.machines(),
                    tasks
                        .iter()
                        .enumerate()
                        .map(|(i, &(task, ty))| Assignment {
                            task,
                            task_type: ty,
                            machine: mapping[i].0,
                            start: starts[i],
                            end: starts[i] + mapping[i].1,
                        })
                        .collect(),
                );
                return Ok(OptResult {
                    opt_makespan: opt,
                    witness,
                    explored: search.explored,
                });
            }
            t -= 1;
            choice[t] += 1;
            if choice[t] < options[t].len() {
                break;
            }
            choice[t] = 0;
        }
    }
}

type Best = (Time, Vec<Time>, Vec<(usize, Time)>);

struct Search<'a> {
    n: usize,
    machines: usize,
    block_preds: &'a [Vec<usize>],
    best: Option<Best>,
    explored: u64,
}

impl Search<'_> {
    fn try_mapping(&mut self, mapping: &[(usize, Time)]) {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.machines];
        for (t, &(m, _)) in mapping.iter().enumerate() {
            groups[m - 1].push(t);
        }
        let mut order: Vec<Vec<usize>> = groups.clone();
        self.permute_machine(mapping, &groups, &mut order, 0);
    }

    fn permute_machine(
        &mut self,
        mapping: &[(usize, Time)],
        groups: &[Vec<usize>],
        order: &mut Vec<Vec<usize>>,
        machine: usize,
    ) {
        if machine == groups.len() {
            self.evaluate(mapping, order);
            return;
        }
        let mut perm = groups[machine].clone();
        permutations(&mut perm, 0, &mut |p| {
            order[machine].clone_from(&p.to_vec());
            self.permute_machine(mapping, groups, order, machine + 1);
        });
    }

    fn evaluate(&mut self, mapping: &[(usize, Time)], order: &[Vec<usize>]) {
        self.explored += 1;
        let mut preds: Vec<Vec<usize>> = self.block_preds.to_vec();
        for seq in order {
            for w in seq.windows(2) {
                preds[w[1]].push(w[0]);
            }
        }
        // Longest-path relaxation; a graph on n nodes settles within n
        // passes unless it has a cycle.
        let mut start = vec![0 as Time; self.n];
        let mut settled = false;
        for _ in 0..=self.n {
            let mut changed = false;
            for v in 0..self.n {
                for &u in &preds[v] {
                    let s = start[u] + mapping[u].1;
                    if s > start[v] {
                        start[v] = s;
                        changed = true;
                    }
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        if !settled {
            return;
        }
        let makespan = (0..self.n)
            .map(|v| start[v] + mapping[v].1)
            .max()
            .unwrap_or(0);
        if self.best.as_ref().is_none_or(|b| makespan < b.0) {
            self.best = Some((makespan, start, mapping.to_vec()));
        }
    }
}

/// Heap-free recursive permutation generator (swap-based, visits each
/// permutation once).
fn permutations(items: &mut [usize], k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k + 1 >= items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}
