//! Phase scripts: compilation into per-wire and per-joint schedules, the two
//! synchronized runtime planners, and the built-in scenarios.

mod builtin;
mod plan;
mod sync;

use thiserror::Error;

pub use builtin::{builtin_scenario, hover_scenario, BuiltinScenario, UnknownBuiltin};
pub use plan::{compile, ramp, CompiledPlan, WireSegment};
pub use sync::{CubixCommand, CubixPlanner, MusashiPlanner, Planner, PlannerId, PlannerOutput, SyncMessage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("scenario has no phases")]
    Empty,
    #[error("{wires} wires but {lengths} initial lengths")]
    Arity { wires: usize, lengths: usize },
    #[error("phase {0} has a non-positive duration")]
    NonPositiveDuration(usize),
    #[error("phase {phase} references unknown wire {wire}")]
    UnknownWire { phase: usize, wire: u8 },
    #[error("phase {phase} references unknown joint `{joint}`")]
    UnknownJoint { phase: usize, joint: String },
}
