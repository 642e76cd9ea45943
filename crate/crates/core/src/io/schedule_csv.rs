//! Schedule CSV: header `job,block,pos,task_type,machine,start,end`, then one
//! row per assignment in stream order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::TaskRef;
use crate::scheduler::{Assignment, Schedule};

pub const SCHEDULE_CSV_HEADER: &str = "job,block,pos,task_type,machine,start,end";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("schedule CSV must start with `{SCHEDULE_CSV_HEADER}`")]
    BadHeader,
    #[error("line {line}: expected 7 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}, field {field}: `{value}` is not an integer")]
    BadField {
        line: usize,
        field: usize,
        value: String,
    },
}

pub fn write_schedule_csv(schedule: &Schedule) -> String {
    let mut out = String::with_capacity(32 * (schedule.assignments().len() + 1));
    out.push_str(SCHEDULE_CSV_HEADER);
    out.push('\n');
    for a in schedule.assignments() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            a.task.job, a.task.block, a.task.pos, a.task_type, a.machine, a.start, a.end
        );
    }
    out
}

/// Reads assignments back. Blank lines are skipped; the machine count is not
/// part of the format, so the caller supplies it via [`Schedule::new`].
pub fn read_schedule_csv(text: &str) -> Result<Vec<Assignment>, CsvError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == SCHEDULE_CSV_HEADER => {}
        _ => return Err(CsvError::BadHeader),
    }
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(CsvError::FieldCount {
                    line,
                    found: fields.len(),
                });
            }
            let mut v = [0i64; 7];
            for (k, f) in fields.iter().enumerate() {
                v[k] = f.parse().map_err(|_| CsvError::BadField {
                    line,
                    field: k + 1,
                    value: f.to_string(),
                })?;
            }
            // Index columns must be nonnegative; times may be anything so
            // the validator can report them.
            let idx = |k: usize| {
                usize::try_from(v[k]).map_err(|_| CsvError::BadField {
                    line,
                    field: k + 1,
                    value: fields[k].to_string(),
                })
            };
            Ok(Assignment {
                task: TaskRef::new(idx(0)?, idx(1)?, idx(2)?),
                task_type: idx(3)?,
                machine: idx(4)?,
                start: v[5],
                end: v[6],
            })
        })
        .collect()
}
