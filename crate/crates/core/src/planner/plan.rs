use std::collections::BTreeMap;

use super::PlanError;
use crate::model::{Phase, WireTarget};

/// Target length of one wire over one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WireSegment {
    /// `start + delta · (τ / duration)`; a hold is a ramp with zero delta.
    Ramp { start: f64, delta: f64 },
    /// Follows the measured length. `start` is the target carried in, used
    /// as the starting point of the next phase when nothing is measured.
    Track { start: f64 },
}

/// Linear interpolation shared by compiled evaluation and the live planner so
/// both produce identical bits.
#[inline]
pub fn ramp(start: f64, delta: f64, tau: f64, duration: f64) -> f64 {
    start + delta * (tau / duration)
}

impl WireSegment {
    pub fn value(&self, tau: f64, duration: f64) -> Option<f64> {
        match *self {
            WireSegment::Ramp { start, delta } => Some(ramp(start, delta, tau, duration)),
            WireSegment::Track { .. } => None,
        }
    }

    pub fn start(&self) -> f64 {
        match *self {
            WireSegment::Ramp { start, .. } | WireSegment::Track { start } => start,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            WireSegment::Ramp { start, delta } => start + delta,
            WireSegment::Track { start } => start,
        }
    }
}

/// A phase script flattened into piecewise-linear schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPlan {
    pub names: Vec<String>,
    pub durations: Vec<f64>,
    /// Start time of each phase followed by the end of the last one.
    pub boundaries: Vec<f64>,
    pub wire_ids: Vec<u8>,
    /// `wires[w][k]`: schedule of wire index `w` during phase `k`.
    pub wires: Vec<Vec<WireSegment>>,
    pub joint_names: Vec<String>,
    /// `joints[j][k]`: `(start, end)` angle of joint `j` during phase `k`.
    pub joints: Vec<Vec<(f64, f64)>>,
    pub compensation: Vec<Vec<u8>>,
    pub sync_barrier: Vec<bool>,
    pub stop_on_contact_force: Vec<Option<f64>>,
}

/// Flattens `phases` into per-wire length schedules and per-joint angle
/// schedules. `initial_lengths` follow `wire_ids`; joints start from
/// `initial_joints` (zero when absent).
pub fn compile(
    phases: &[Phase],
    wire_ids: &[u8],
    initial_lengths: &[f64],
    joint_names: &[String],
    initial_joints: &BTreeMap<String, f64>,
) -> Result<CompiledPlan, PlanError> {
    if phases.is_empty() {
        return Err(PlanError::Empty);
    }
    if wire_ids.len() != initial_lengths.len() {
        return Err(PlanError::Arity { wires: wire_ids.len(), lengths: initial_lengths.len() });
    }
    let index_of = |id: u8| wire_ids.iter().position(|&w| w == id);

    let mut boundaries = Vec::with_capacity(phases.len() + 1);
    let mut t = 0.0;
    boundaries.push(t);
    for (k, p) in phases.iter().enumerate() {
        if !(p.duration > 0.0 && p.duration.is_finite()) {
            return Err(PlanError::NonPositiveDuration(k));
        }
        t += p.duration;
        boundaries.push(t);
        for &id in p.wires.keys().chain(&p.compensation) {
            if index_of(id).is_none() {
                return Err(PlanError::UnknownWire { phase: k, wire: id });
            }
        }
        for name in p.joints.keys() {
            if !joint_names.contains(name) {
                return Err(PlanError::UnknownJoint { phase: k, joint: name.clone() });
            }
        }
    }

    let wires = wire_ids
        .iter()
        .zip(initial_lengths)
        .map(|(&id, &l0)| {
            let mut current = l0;
            phases
                .iter()
                .map(|p| {
                    let seg = match p.wires.get(&id).copied().unwrap_or(WireTarget::Hold) {
                        WireTarget::Delta(delta) => WireSegment::Ramp { start: current, delta },
                        WireTarget::Hold => WireSegment::Ramp { start: current, delta: 0.0 },
                        WireTarget::Track => WireSegment::Track { start: current },
                    };
                    current = seg.end();
                    seg
                })
                .collect()
        })
        .collect();

    let joints = joint_names
        .iter()
        .map(|name| {
            let mut current = initial_joints.get(name).copied().unwrap_or(0.0);
            phases
                .iter()
                .map(|p| {
                    let start = current;
                    current = p.joints.get(name).copied().unwrap_or(start);
                    (start, current)
                })
                .collect()
        })
        .collect();

    Ok(CompiledPlan {
        names: phases.iter().map(|p| p.name.clone()).collect(),
        durations: phases.iter().map(|p| p.duration).collect(),
        boundaries,
        wire_ids: wire_ids.to_vec(),
        wires,
        joint_names: joint_names.to_vec(),
        joints,
        compensation: phases.iter().map(|p| p.compensation.clone()).collect(),
        sync_barrier: phases.iter().map(|p| p.sync_barrier).collect(),
        stop_on_contact_force: phases.iter().map(|p| p.stop_on_contact_force).collect(),
    })
}

impl CompiledPlan {
    pub fn phase_count(&self) -> usize {
        self.names.len()
    }

    pub fn end_time(&self) -> f64 {
        *self.boundaries.last().expect("at least one phase")
    }

    /// Phase active at `t` and the time elapsed inside it. Past the end the
    /// last phase holds its final values.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.phase_count() - 1;
        let k = (0..last).find(|&k| t < self.boundaries[k + 1]).unwrap_or(last);
        let tau = (t - self.boundaries[k]).clamp(0.0, self.durations[k]);
        (k, tau)
    }

    /// Target length of wire index `w` at `t`; `None` while it tracks.
    pub fn l_ref(&self, w: usize, t: f64) -> Option<f64> {
        let (k, tau) = self.locate(t);
        self.wires[w][k].value(tau, self.durations[k])
    }

    pub fn joint_targets(&self, t: f64) -> Vec<f64> {
        let (k, tau) = self.locate(t);
        self.joints.iter().map(|j| ramp(j[k].0, j[k].1 - j[k].0, tau, self.durations[k])).collect()
    }

    pub fn compensation_at(&self, t: f64) -> &[u8] {
        &self.compensation[self.locate(t).0]
    }
}
