//! Online greedy scheduling of block-structured jobs on unrelated parallel
//! machines.
//!
//! A job is a sequence of blocks and a block is a set of tasks. Tasks of a
//! block may run in parallel, but the next block of the same job starts only
//! once every task of the previous one has finished. Each machine processes
//! one task at a time, and its processing time depends on both the machine
//! and the task type.
//!
//! Tasks are scheduled online, in arrival order, by one of three greedy
//! policies (see [`scheduler::Variant`]). The crate also ships an
//! independent feasibility checker and an exhaustive optimum for tiny
//! instances ([`verify`]), a reproducible instance generator
//! ([`generator`]), a comparison harness ([`bench`]) and text formats
//! ([`io`]).

pub mod bench;
pub mod generator;
pub mod io;
pub mod model;
pub mod scheduler;
pub mod timeline;
pub mod verify;

pub use model::{Block, Instance, Job, TaskRef, Time, TimeMatrix};
pub use scheduler::{run_stream, Assignment, Schedule, Variant};
