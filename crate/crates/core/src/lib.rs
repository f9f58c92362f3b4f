//! Simulation of a wire-driven humanoid suspended from a winch cube.
//!
//! Modules follow the data flow of a run: [`model`] loads and validates a
//! scenario, [`kinematics`] places the body and its wires, [`control`]
//! turns wire targets into tensions, [`dynamics`] integrates the floating
//! base, [`planner`] sequences phases, and [`engine`] ties them together
//! and writes the logs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod engine;
pub mod kinematics;
pub mod model;
pub mod planner;
