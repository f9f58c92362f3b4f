use nalgebra::Vector3;

use super::ControlError;
use crate::kinematics::{BodyFrames, WireGeometry};

/// Quasi-static torque balance about one joint axis, N·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueBudget {
    /// Torque the joint actuator must supply to hold the prescribed posture.
    pub required: f64,
    pub wire: f64,
    pub gravity: f64,
}

/// Torques about `joint` from gravity and wire tensions acting on the
/// segments distal to it. `tensions[i]` goes with `geometries[i]`.
pub fn joint_torque_budget(
    joint: &str,
    frames: &BodyFrames<'_>,
    geometries: &[WireGeometry],
    tensions: &[f64],
    gravity: f64,
) -> Result<TorqueBudget, ControlError> {
    let model = frames.model();
    let j = model.joint_index(joint).ok_or_else(|| ControlError::UnknownJoint(joint.into()))?;
    if geometries.len() != tensions.len() {
        return Err(ControlError::Arity(format!("{} geometries, {} tensions", geometries.len(), tensions.len())));
    }
    let child = model.joints()[j].child;
    let (origin, axis) = frames.joint_axis(j);
    let about_axis = |point: &Vector3<f64>, force: &Vector3<f64>| (point - origin).cross(force).dot(&axis);

    let mut gravity_torque = 0.0;
    for (i, seg) in model.segments().iter().enumerate() {
        if model.is_in_subtree(i, child) {
            let com = frames.world_point(i, &seg.com);
            gravity_torque += about_axis(&com, &Vector3::new(0.0, 0.0, -seg.mass * gravity));
        }
    }

    let mut wire_torque = 0.0;
    for (g, &t) in geometries.iter().zip(tensions) {
        if t == 0.0 {
            continue;
        }
        for fa in g.force_application.iter().filter(|fa| model.is_in_subtree(fa.segment, child)) {
            wire_torque += about_axis(&fa.point, &(fa.direction * t));
        }
    }

    Ok(TorqueBudget { required: -(gravity_torque + wire_torque), wire: wire_torque, gravity: gravity_torque })
}
