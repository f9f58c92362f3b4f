//! Domain types, physical constants, and the scenario document.

mod scenario;
mod validate;

use nalgebra::{UnitQuaternion, Vector3};
use thiserror::Error;

pub use scenario::{
    Anchor, BodySegment, ContactParams, ControllerGains, InitialPose, KickTarget, Phase, PhysicalConstants, PointRef,
    RevoluteJoint, Scenario, SimSettings, Wire, WireTarget, WIRE_COUNT,
};
pub use validate::{validate_scenario, Violation};

/// Position of the base frame origin (the cube center) and its orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self { position: Vector3::zeros(), orientation: UnitQuaternion::identity() }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    pub fn from_rpy(position: Vector3<f64>, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { position, orientation: UnitQuaternion::from_euler_angles(roll, pitch, yaw) }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * p
    }
}

/// World-frame velocities. `linear_velocity` is the velocity of the composite
/// center of mass, not of the base origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl Twist {
    pub fn zero() -> Self {
        Self { linear_velocity: Vector3::zeros(), angular_velocity: Vector3::zeros() }
    }

    pub fn is_finite(&self) -> bool {
        self.linear_velocity.iter().chain(self.angular_velocity.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at `{path}` (line {line}, column {column}): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("invalid scenario: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scenario = scenario_from_value(value).map_err(|e| match e {
        // Value-level errors carry no positions; recover them by re-parsing the text.
        ScenarioError::Parse { path, message, .. } => {
            let de = &mut serde_json::Deserializer::from_str(text);
            let (line, column) = match serde_path_to_error::deserialize::<_, Scenario>(de) {
                Err(e) => (e.inner().line(), e.inner().column()),
                Ok(_) => (0, 0),
            };
            ScenarioError::Parse { path, line, column, message }
        }
        other => other,
    })?;
    Ok(scenario)
}

/// Builds a validated scenario from an already-parsed tree (used after overrides).
pub fn scenario_from_value(value: serde_json::Value) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| ScenarioError::Parse {
        path: e.path().to_string(),
        line: 0,
        column: 0,
        message: e.inner().to_string(),
    })?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

pub fn serialize_scenario(scenario: &Scenario) -> Result<String, ScenarioError> {
    Ok(serde_json::to_string_pretty(scenario)?)
}

#[derive(Debug, Error, PartialEq)]
pub enum OverrideError {
    #[error("override `{0}` is not of the form key.path=value")]
    Malformed(String),
    #[error("override path `{0}` does not address the scenario tree")]
    BadPath(String),
}

/// Applies a `dotted.key=value` override to a scenario tree. The value is read
/// as JSON when it parses, otherwise as a string. Missing object keys are
/// created; schema checking happens when the tree is deserialized.
pub fn apply_override(tree: &mut serde_json::Value, spec: &str) -> Result<(), OverrideError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| OverrideError::Malformed(spec.into()))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(OverrideError::Malformed(spec.into()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_string()));
    let mut node = tree;
    for key in path.split('.') {
        node = match node {
            serde_json::Value::Object(map) => map.entry(key.to_string()).or_insert_with(|| serde_json::json!({})),
            serde_json::Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| OverrideError::BadPath(path.into()))?;
                items.get_mut(idx).ok_or_else(|| OverrideError::BadPath(path.into()))?
            }
            _ => return Err(OverrideError::BadPath(path.into())),
        };
    }
    *node = value;
    Ok(())
}
