//! Forward kinematics of the prescribed-joint body, cable routing, composite
//! inertia, and cable statics.
//!
//! The base frame sits at the cube center. Moments are reported about the
//! composite center of mass so that gravity contributes a pure force.

mod body;
mod cable;
mod euler;

use thiserror::Error;

use crate::model::PointRef;

pub use body::{
    composite_properties, forward_kinematics, BodyFrames, BodyModel, CompositeProperties, JointAngles, JointModel,
    SegmentModel,
};
pub use cable::{wire_geometry, wrench_matrix, ForceApplication, WireGeometry, WireSpan, Wrench, MIN_SEPARATION};
pub use euler::{euler_zyx, quaternion_from_euler_zyx, EulerZyx, GIMBAL_MARGIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("joint `{joint}` angle {angle} rad is outside its limits")]
    AngleOutOfLimits { joint: String, angle: f64 },
    #[error("expected {expected} joint angles, got {got}")]
    AngleCount { expected: usize, got: usize },
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(PointRef),
    #[error("wire {wire}: consecutive routing points coincide")]
    CoincidentPoints { wire: u8 },
    #[error("wire {0} is body-anchored and cannot carry an environment wrench")]
    InternalWireActive(u8),
    #[error("wrench matrix needs at least one wire")]
    NoActiveWires,
    #[error("invalid joint tree: {0}")]
    InvalidTree(String),
}
