//! Busy intervals of a single machine.

use thiserror::Error;

use crate::model::Time;

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub start: Time,
    pub end: Time,
}

impl Interval {
    pub fn new(start: Time, end: Time) -> Self {
        Interval { start, end }
    }

    pub fn len(&self) -> Time {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(Time),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(Time),
    #[error("[{}, {}) overlaps busy interval [{}, {})", .requested.start, .requested.end, .conflict.start, .conflict.end)]
    Overlap {
        requested: Interval,
        conflict: Interval,
    },
}

/// Disjoint busy intervals sorted by start. Touching intervals are kept
/// separate, one per reservation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MachineTimeline {
    busy: Vec<Interval>,
}

impl MachineTimeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn busy(&self) -> &[Interval] {
        &self.busy
    }

    /// Smallest `d >= ready` such that `[d, d + duration)` is free.
    pub fn earliest_fit(&self, ready: Time, duration: Time) -> Result<Time, TimelineError> {
        check(ready, duration)?;
        // Intervals are disjoint and sorted by start, so their ends are sorted too.
        let first = self.busy.partition_point(|iv| iv.end <= ready);
        let mut candidate = ready;
        for iv in &self.busy[first..] {
            if candidate + duration <= iv.start {
                break;
            }
            candidate = candidate.max(iv.end);
        }
        Ok(candidate)
    }

    pub fn reserve(&mut self, start: Time, duration: Time) -> Result<Interval, TimelineError> {
        check(start, duration)?;
        let requested = Interval::new(start, start + duration);
        let pos = self.busy.partition_point(|iv| iv.start < start);
        let neighbours = pos.checked_sub(1).into_iter().chain(Some(pos));
        for idx in neighbours {
            if let Some(iv) = self.busy.get(idx) {
                if iv.overlaps(&requested) {
                    return Err(TimelineError::Overlap {
                        requested,
                        conflict: *iv,
                    });
                }
            }
        }
        self.busy.insert(pos, requested);
        Ok(requested)
    }

    /// Latest end over busy intervals, 0 when empty.
    pub fn horizon(&self) -> Time {
        self.busy.last().map_or(0, |iv| iv.end)
    }

    pub fn busy_time(&self) -> Time {
        self.busy.iter().map(Interval::len).sum()
    }

    pub fn idle_time(&self) -> Time {
        self.horizon() - self.busy_time()
    }
}

fn check(at: Time, duration: Time) -> Result<(), TimelineError> {
    if duration <= 0 {
        return Err(TimelineError::NonPositiveDuration(duration));
    }
    if at < 0 {
        return Err(TimelineError::NegativeTime(at));
    }
    Ok(())
}
