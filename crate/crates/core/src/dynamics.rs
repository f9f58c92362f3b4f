//! Floating-base integration of the composite body.
//!
//! Joints are prescribed, so the body is treated as one rigid composite whose
//! mass properties are recomputed from the current joint angles every step
//! (inertia-rate terms are dropped). The integrator is semi-implicit Euler on
//! COM velocity and world angular momentum; rotation uses the quaternion
//! exponential. Ground contact is a penalty spring-damper at every contact
//! point below `z = 0` with viscous tangential friction.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::kinematics::{
    composite_properties, forward_kinematics, wire_geometry, BodyFrames, BodyModel, CompositeProperties, JointAngles,
    KinematicsError, WireGeometry, Wrench,
};
use crate::model::{Pose, Scenario, Twist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("wire index {index}: tension {tension} N is negative")]
    NegativeTension { index: usize, tension: f64 },
    #[error("wire index {index}: tension {tension} N exceeds its limit {limit} N")]
    TensionAboveLimit { index: usize, tension: f64, limit: f64 },
    #[error("{got} tensions for {expected} wires")]
    Arity { expected: usize, got: usize },
    #[error("non-finite {what} at t = {time} s")]
    NonFinite { time: f64, what: &'static str },
}

/// Full simulation state. Per-wire vectors follow the scenario's wire order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub base_pose: Pose,
    pub base_twist: Twist,
    pub joint_angles: JointAngles,
    pub wire_lengths: Vec<f64>,
    pub wire_rates: Vec<f64>,
    pub wire_tensions: Vec<f64>,
}

/// Contact force at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactForce {
    pub segment: usize,
    pub point: String,
    pub position: Vector3<f64>,
    pub force: Vector3<f64>,
}

/// Everything derived from a pose and joint angles.
#[derive(Debug, Clone)]
pub struct Snapshot<'m> {
    pub frames: BodyFrames<'m>,
    pub composite: CompositeProperties,
    pub geometries: Vec<WireGeometry>,
}

impl Snapshot<'_> {
    pub fn wire_lengths(&self) -> Vec<f64> {
        self.geometries.iter().map(|g| g.total_length).collect()
    }
}

#[derive(Debug, Clone)]
pub struct WrenchReport {
    /// Net wrench, moments about the composite COM.
    pub wrench: Wrench,
    pub contacts: Vec<ContactForce>,
}

impl WrenchReport {
    pub fn total_normal_force(&self) -> f64 {
        self.contacts.iter().map(|c| c.force.z).sum()
    }
}

/// The scenario's body and wires, ready to integrate.
#[derive(Debug, Clone)]
pub struct Dynamics<'s> {
    scenario: &'s Scenario,
    model: BodyModel,
    f_max: Vec<f64>,
}

impl<'s> Dynamics<'s> {
    pub fn new(scenario: &'s Scenario) -> Result<Self, DynamicsError> {
        let model = BodyModel::from_scenario(scenario)?;
        let f_max = scenario.wires.iter().map(|w| scenario.wire_f_max(w)).collect();
        Ok(Self { scenario, model, f_max })
    }

    pub fn scenario(&self) -> &'s Scenario {
        self.scenario
    }

    pub fn model(&self) -> &BodyModel {
        &self.model
    }

    pub fn f_max(&self) -> &[f64] {
        &self.f_max
    }

    pub fn snapshot(&self, pose: &Pose, angles: &JointAngles) -> Result<Snapshot<'_>, DynamicsError> {
        let frames = forward_kinematics(pose, angles, &self.model)?;
        let composite = composite_properties(&frames);
        let geometries =
            self.scenario.wires.iter().map(|w| wire_geometry(w, &frames)).collect::<Result<Vec<_>, _>>()?;
        Ok(Snapshot { frames, composite, geometries })
    }

    /// State at rest in the scenario's initial pose.
    pub fn initial_state(&self) -> Result<SimState, DynamicsError> {
        let sim = &self.scenario.sim;
        let pose = Pose::from_rpy(
            sim.initial_pose.position,
            sim.initial_pose.rpy.x,
            sim.initial_pose.rpy.y,
            sim.initial_pose.rpy.z,
        );
        let angles = self.model.angles_from_map(&sim.initial_joints)?;
        let snap = self.snapshot(&pose, &angles)?;
        let n = self.scenario.wires.len();
        Ok(SimState {
            time: 0.0,
            base_pose: pose,
            base_twist: Twist::zero(),
            joint_angles: angles,
            wire_lengths: snap.wire_lengths(),
            wire_rates: vec![0.0; n],
            wire_tensions: vec![0.0; n],
        })
    }

    fn check_tensions(&self, tensions: &[f64]) -> Result<(), DynamicsError> {
        if tensions.len() != self.f_max.len() {
            return Err(DynamicsError::Arity { expected: self.f_max.len(), got: tensions.len() });
        }
        for (index, (&tension, &limit)) in tensions.iter().zip(&self.f_max).enumerate() {
            if !(tension >= 0.0) {
                return Err(DynamicsError::NegativeTension { index, tension });
            }
            if tension > limit {
                return Err(DynamicsError::TensionAboveLimit { index, tension, limit });
            }
        }
        Ok(())
    }

    /// Gravity, wire, and contact wrench on the body for the given tensions.
    pub fn assemble_wrench(
        &self,
        state: &SimState,
        snap: &Snapshot<'_>,
        tensions: &[f64],
    ) -> Result<WrenchReport, DynamicsError> {
        self.check_tensions(tensions)?;
        let com = snap.composite.com_world;
        let mut wrench = Wrench {
            force: Vector3::new(0.0, 0.0, -snap.composite.total_mass * self.scenario.constants.gravity),
            moment: Vector3::zeros(),
        };
        for (g, &t) in snap.geometries.iter().zip(tensions) {
            if t != 0.0 {
                wrench += g.wrench(t, &com);
            }
        }
        let contacts = if self.scenario.contact.enabled { self.contact_forces(state, snap) } else { Vec::new() };
        for c in &contacts {
            wrench.force += c.force;
            wrench.moment += (c.position - com).cross(&c.force);
        }
        Ok(WrenchReport { wrench, contacts })
    }

    /// Penalty forces at every contact point below the floor.
    pub fn contact_forces(&self, state: &SimState, snap: &Snapshot<'_>) -> Vec<ContactForce> {
        let params = &self.scenario.contact;
        let com = snap.composite.com_world;
        let v = state.base_twist.linear_velocity;
        let w = state.base_twist.angular_velocity;
        snap.frames
            .contact_points()
            .filter(|(_, _, p)| p.z < 0.0)
            .map(|(segment, name, p)| {
                let vp = v + w.cross(&(p - com));
                let normal = (params.stiffness * -p.z - params.damping * vp.z).max(0.0);
                let force = Vector3::new(-params.viscous_friction * vp.x, -params.viscous_friction * vp.y, normal);
                ContactForce { segment, point: name.to_string(), position: p, force }
            })
            .collect()
    }

    /// Advances one step of `dt` under `wrench`, moving the joints to `next_angles`.
    pub fn step(
        &self,
        state: &SimState,
        snap: &Snapshot<'_>,
        wrench: &Wrench,
        tensions: &[f64],
        next_angles: &JointAngles,
        dt: f64,
    ) -> Result<SimState, DynamicsError> {
        self.check_tensions(tensions)?;
        let time = state.time + dt;
        let c = &snap.composite;
        let inertia = c.inertia_about_com_world;

        let velocity = state.base_twist.linear_velocity + wrench.force * (dt / c.total_mass);
        let momentum = inertia * state.base_twist.angular_velocity + wrench.moment * dt;
        let omega_mid = solve_inertia(&inertia, &momentum);

        let com = c.com_world + velocity * dt;
        let orientation = UnitQuaternion::from_scaled_axis(omega_mid * dt) * state.base_pose.orientation;
        let orientation = UnitQuaternion::new_normalize(orientation.into_inner());

        // Place the base so the new posture keeps the integrated COM.
        let probe = Pose::new(Vector3::zeros(), orientation);
        let probe_snap = self.snapshot(&probe, next_angles)?;
        let base_pose = Pose::new(com - probe_snap.composite.com_world, orientation);
        let omega = solve_inertia(&probe_snap.composite.inertia_about_com_world, &momentum);

        let next_snap = self.snapshot(&base_pose, next_angles)?;
        let wire_lengths = next_snap.wire_lengths();
        let wire_rates = wire_lengths.iter().zip(&state.wire_lengths).map(|(l, l0)| (l - l0) / dt).collect();

        let next = SimState {
            time,
            base_pose,
            base_twist: Twist { linear_velocity: velocity, angular_velocity: omega },
            joint_angles: next_angles.clone(),
            wire_lengths,
            wire_rates,
            wire_tensions: tensions.to_vec(),
        };
        check_finite(&next)?;
        Ok(next)
    }

    /// Kinetic plus gravitational potential energy.
    pub fn mechanical_energy(&self, state: &SimState, snap: &Snapshot<'_>) -> f64 {
        let c = &snap.composite;
        let v = &state.base_twist.linear_velocity;
        let w = &state.base_twist.angular_velocity;
        0.5 * c.total_mass * v.norm_squared()
            + 0.5 * w.dot(&(c.inertia_about_com_world * w))
            + c.total_mass * self.scenario.constants.gravity * c.com_world.z
    }

    /// World angular momentum about the COM.
    pub fn angular_momentum(&self, state: &SimState, snap: &Snapshot<'_>) -> Vector3<f64> {
        snap.composite.inertia_about_com_world * state.base_twist.angular_velocity
    }
}

fn solve_inertia(inertia: &Matrix3<f64>, momentum: &Vector3<f64>) -> Vector3<f64> {
    match inertia.try_inverse() {
        Some(inv) => inv * momentum,
        None => inertia.pseudo_inverse(1e-12).map(|p| p * momentum).unwrap_or_else(|_| Vector3::zeros()),
    }
}

fn check_finite(s: &SimState) -> Result<(), DynamicsError> {
    let time = s.time;
    if !s.base_pose.position.iter().all(|v| v.is_finite())
        || !s.base_pose.orientation.coords.iter().all(|v| v.is_finite())
    {
        return Err(DynamicsError::NonFinite { time, what: "base pose" });
    }
    if !s.base_twist.is_finite() {
        return Err(DynamicsError::NonFinite { time, what: "base twist" });
    }
    if !s.wire_lengths.iter().chain(&s.wire_rates).all(|v| v.is_finite()) {
        return Err(DynamicsError::NonFinite { time, what: "wire state" });
    }
    Ok(())
}
