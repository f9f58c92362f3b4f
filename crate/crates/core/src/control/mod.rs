//! Wire controller: PD on wire length, gravity feedforward distributed over
//! the compensating wires, and conversion of tensions to motor currents.

mod distribution;
mod torque;

use nalgebra::{Matrix3xX, Vector3};
use thiserror::Error;

use crate::kinematics::WireGeometry;
use crate::model::{ControllerGains, PhysicalConstants};

pub use distribution::{min_norm_tensions, Distribution, DistributionError};
pub use torque::{joint_torque_budget, TorqueBudget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("input arity mismatch: {0}")]
    Arity(String),
    #[error("negative feedforward on wire index {0}")]
    NegativeFeedforward(usize),
    #[error("gravity feedforward needs at least one environment-anchored wire")]
    NoCompensationWires,
    #[error("wire {0} is body-anchored and cannot compensate weight")]
    InternalWire(u8),
    #[error("feedforward infeasible: {0}")]
    Infeasible(DistributionError),
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
}

/// PD output before current conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct PdTension {
    pub f_ref: Vec<f64>,
    pub saturated: Vec<bool>,
}

/// Commanded tensions and the matching motor currents.
#[derive(Debug, Clone, PartialEq)]
pub struct TensionCommand {
    pub f_ref: Vec<f64>,
    pub i_ref: Vec<f64>,
    pub saturation_flags: Vec<bool>,
}

impl TensionCommand {
    pub fn new(pd: PdTension, constants: &PhysicalConstants) -> Self {
        let i_ref = tension_to_current(&pd.f_ref, constants);
        Self { f_ref: pd.f_ref, i_ref, saturation_flags: pd.saturated }
    }
}

/// Per-wire PD on length plus feedforward, clamped to `[0, f_max]`.
///
/// Positive tension shortens a wire, so the error is `l − l_ref`; the damping
/// term drives the wire rate toward zero, adding tension while the wire pays
/// out: `f = kp·(l − l_ref) + kd·l̇ + f_ff`.
pub fn pd_tension(
    l_ref: &[f64],
    l: &[f64],
    l_dot: &[f64],
    gains: &ControllerGains,
    f_ff: &[f64],
    f_max: &[f64],
) -> Result<PdTension, ControlError> {
    let n = l_ref.len();
    if [l.len(), l_dot.len(), f_ff.len(), f_max.len()].iter().any(|&m| m != n) {
        return Err(ControlError::Arity(format!(
            "l_ref {n}, l {}, l_dot {}, f_ff {}, f_max {}",
            l.len(),
            l_dot.len(),
            f_ff.len(),
            f_max.len()
        )));
    }
    if let Some(i) = f_ff.iter().position(|&f| !(f >= 0.0)) {
        return Err(ControlError::NegativeFeedforward(i));
    }
    let mut f_ref = Vec::with_capacity(n);
    let mut saturated = Vec::with_capacity(n);
    for i in 0..n {
        let raw = gains.kp * (l[i] - l_ref[i]) + gains.kd * l_dot[i] + f_ff[i];
        let clamped = raw.clamp(0.0, f_max[i]);
        saturated.push(clamped != raw);
        f_ref.push(clamped);
    }
    Ok(PdTension { f_ref, saturated })
}

/// Feedforward tensions for the compensating wires.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedforward {
    pub tensions: Vec<f64>,
    /// Moment about the COM left by the feedforward tensions (not compensated).
    pub moment_residual: Vector3<f64>,
}

/// Distributes the body weight over `active` wires: the minimum-norm tensions
/// within `[0, f_max]` whose combined force is exactly `(0, 0, weight)`.
pub fn gravity_feedforward(
    active: &[&WireGeometry],
    f_max: &[f64],
    com_world: &Vector3<f64>,
    weight: f64,
) -> Result<Feedforward, ControlError> {
    if active.is_empty() {
        return Err(ControlError::NoCompensationWires);
    }
    if active.len() != f_max.len() {
        return Err(ControlError::Arity(format!("{} wires, {} limits", active.len(), f_max.len())));
    }
    let mut a = Matrix3xX::zeros(active.len());
    for (i, g) in active.iter().enumerate() {
        if g.internal {
            return Err(ControlError::InternalWire(g.wire_id));
        }
        a.set_column(i, &g.wrench(1.0, com_world).force);
    }
    let solution = min_norm_tensions(&a, &Vector3::new(0.0, 0.0, weight), f_max).map_err(ControlError::Infeasible)?;
    let moment_residual = active.iter().zip(&solution.tensions).map(|(g, &t)| g.wrench(t, com_world).moment).sum();
    Ok(Feedforward { tensions: solution.tensions, moment_residual })
}

/// Motor current for each tension through the pulley and gearbox:
/// `i = f·r / (k_t·G)`.
pub fn tension_to_current(f_ref: &[f64], c: &PhysicalConstants) -> Vec<f64> {
    let gain = c.pulley_radius / (c.torque_constant * c.gear_ratio);
    f_ref.iter().map(|f| f * gain).collect()
}
