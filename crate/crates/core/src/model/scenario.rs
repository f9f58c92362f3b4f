//! Scenario schema: the structured document a simulation run is built from.
//!
//! Every struct here rejects unknown keys, and every optional field carries a
//! documented default. Lengths are meters, angles radians, forces newtons.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Number of winch modules on the cube; wire ids live in `0..WIRE_COUNT`.
pub const WIRE_COUNT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    #[serde(default = "defaults::gravity")]
    pub gravity: f64,
    #[serde(default = "defaults::total_mass")]
    pub total_mass: f64,
    #[serde(default = "defaults::f_max_per_wire")]
    pub f_max_per_wire: f64,
    #[serde(default = "defaults::wind_rate_max")]
    pub wind_rate_max: f64,
    #[serde(default = "defaults::pulley_radius")]
    pub pulley_radius: f64,
    #[serde(default = "defaults::torque_constant")]
    pub torque_constant: f64,
    #[serde(default = "defaults::gear_ratio")]
    pub gear_ratio: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            gravity: defaults::gravity(),
            total_mass: defaults::total_mass(),
            f_max_per_wire: defaults::f_max_per_wire(),
            wind_rate_max: defaults::wind_rate_max(),
            pulley_radius: defaults::pulley_radius(),
            torque_constant: defaults::torque_constant(),
            gear_ratio: defaults::gear_ratio(),
        }
    }
}

impl PhysicalConstants {
    pub fn weight(&self) -> f64 {
        self.total_mass * self.gravity
    }
}

/// One rigid piece of the body. `mass` values across all segments are a mass
/// distribution: the body model rescales masses and inertias so that they sum
/// to `constants.total_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySegment {
    pub name: String,
    pub mass: f64,
    #[serde(default = "Vector3::zeros")]
    pub com: Vector3<f64>,
    /// Inertia about the segment COM, expressed in the segment frame (rows).
    #[serde(default)]
    pub inertia: [[f64; 3]; 3],
    #[serde(default)]
    pub points: BTreeMap<String, Vector3<f64>>,
    #[serde(default)]
    pub contact_points: BTreeMap<String, Vector3<f64>>,
}

impl BodySegment {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let i = &self.inertia;
        Matrix3::new(i[0][0], i[0][1], i[0][2], i[1][0], i[1][1], i[1][2], i[2][0], i[2][1], i[2][2])
    }

    /// Looks up a named point among attachment points first, then contact points.
    pub fn point(&self, name: &str) -> Option<&Vector3<f64>> {
        self.points.get(name).or_else(|| self.contact_points.get(name))
    }
}

/// Prescribed revolute joint. The child frame coincides with the parent frame
/// translated to `origin` when the angle is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevoluteJoint {
    pub name: String,
    pub parent: String,
    pub child: String,
    pub origin: Vector3<f64>,
    pub axis: Vector3<f64>,
    pub limits: [f64; 2],
    /// Actuator torque limit, N·m; unlimited when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRef {
    pub segment: String,
    pub point: String,
}

impl PointRef {
    pub fn new(segment: impl Into<String>, point: impl Into<String>) -> Self {
        Self { segment: segment.into(), point: point.into() }
    }
}

impl std::fmt::Display for PointRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.segment, self.point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Anchor {
    /// Fixed point in the world frame.
    Environment(Vector3<f64>),
    /// Point on the robot itself; the wire is body-internal.
    Body(PointRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wire {
    pub id: u8,
    pub exit: PointRef,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub via: Vec<PointRef>,
    pub anchor: Anchor,
    /// Per-wire tension limit; falls back to `constants.f_max_per_wire`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_max: Option<f64>,
}

impl Wire {
    pub fn is_internal(&self) -> bool {
        matches!(self.anchor, Anchor::Body(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    #[serde(default = "defaults::kp")]
    pub kp: f64,
    #[serde(default = "defaults::kd")]
    pub kd: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self { kp: defaults::kp(), kd: defaults::kd() }
    }
}

/// Per-wire instruction for one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WireTarget {
    /// Change the target length by this amount over the phase (negative winds).
    Delta(f64),
    /// Keep the target length fixed.
    Hold,
    /// Follow the measured length; the PD term is zero.
    Track,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub name: String,
    pub duration: f64,
    /// Wires not listed hold their target.
    #[serde(default)]
    pub wires: BTreeMap<u8, WireTarget>,
    #[serde(default)]
    pub compensation: Vec<u8>,
    /// Joint angles reached at the end of the phase.
    #[serde(default)]
    pub joints: BTreeMap<String, f64>,
    #[serde(default)]
    pub sync_barrier: bool,
    /// Freeze wire targets once the total ground normal force reaches this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_on_contact_force: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPose {
    #[serde(default = "Vector3::zeros")]
    pub position: Vector3<f64>,
    /// Intrinsic Z-Y-X angles as `[roll, pitch, yaw]`.
    #[serde(default = "Vector3::zeros")]
    pub rpy: Vector3<f64>,
}

impl Default for InitialPose {
    fn default() -> Self {
        Self { position: Vector3::zeros(), rpy: Vector3::zeros() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Defaults to the sum of phase durations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default)]
    pub initial_pose: InitialPose,
    #[serde(default)]
    pub initial_joints: BTreeMap<String, f64>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: defaults::dt(),
            duration: None,
            initial_pose: InitialPose::default(),
            initial_joints: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams {
    #[serde(default = "defaults::yes")]
    pub enabled: bool,
    #[serde(default = "defaults::contact_stiffness")]
    pub stiffness: f64,
    #[serde(default = "defaults::contact_damping")]
    pub damping: f64,
    #[serde(default = "defaults::viscous_friction")]
    pub viscous_friction: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            enabled: true,
            stiffness: defaults::contact_stiffness(),
            damping: defaults::contact_damping(),
            viscous_friction: defaults::viscous_friction(),
        }
    }
}

/// A world plane the designated foot point must cross for a kick to register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickTarget {
    pub point: Vector3<f64>,
    /// Points from the approach side toward the target.
    pub normal: Vector3<f64>,
    pub foot: PointRef,
}

impl KickTarget {
    /// Signed distance of `p` past the plane; negative on the approach side.
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        (p - self.point).dot(&self.normal.normalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    /// Free-form notes on invented geometry (anchor positions, heights).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub segments: Vec<BodySegment>,
    #[serde(default)]
    pub joints: Vec<RevoluteJoint>,
    pub wires: Vec<Wire>,
    #[serde(default)]
    pub gains: ControllerGains,
    pub phases: Vec<Phase>,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kick_target: Option<KickTarget>,
}

impl Scenario {
    pub fn wire(&self, id: u8) -> Option<&Wire> {
        self.wires.iter().find(|w| w.id == id)
    }

    pub fn segment(&self, name: &str) -> Option<&BodySegment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&RevoluteJoint> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn wire_f_max(&self, wire: &Wire) -> f64 {
        wire.f_max.unwrap_or(self.constants.f_max_per_wire)
    }

    pub fn total_phase_time(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }

    pub fn duration(&self) -> f64 {
        self.sim.duration.unwrap_or_else(|| self.total_phase_time())
    }

    /// Number of integration steps; the log holds one more row than this.
    pub fn step_count(&self) -> usize {
        (self.duration() / self.sim.dt).round() as usize
    }
}

pub(crate) mod defaults {
    pub fn gravity() -> f64 {
        9.81
    }
    pub fn total_mass() -> f64 {
        44.6
    }
    pub fn f_max_per_wire() -> f64 {
        180.0
    }
    pub fn wind_rate_max() -> f64 {
        0.242
    }
    pub fn pulley_radius() -> f64 {
        0.025
    }
    pub fn torque_constant() -> f64 {
        0.1
    }
    pub fn gear_ratio() -> f64 {
        5.0
    }
    pub fn kp() -> f64 {
        500.0
    }
    pub fn kd() -> f64 {
        50.0
    }
    pub fn dt() -> f64 {
        0.001
    }
    pub fn yes() -> bool {
        true
    }
    pub fn contact_stiffness() -> f64 {
        5.0e4
    }
    pub fn contact_damping() -> f64 {
        5.0e3
    }
    pub fn viscous_friction() -> f64 {
        200.0
    }
}
