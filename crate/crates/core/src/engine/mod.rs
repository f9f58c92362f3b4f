//! The simulation loop: planner, controller, and dynamics in lockstep, with
//! event detection and trajectory logging.

mod events;
mod log;
mod plot;

use thiserror::Error;

use crate::control::{gravity_feedforward, pd_tension, ControlError, TensionCommand};
use crate::dynamics::{Dynamics, DynamicsError, SimState};
use crate::kinematics::{euler_zyx, JointAngles};
use crate::model::{validate_scenario, Scenario, Violation, WIRE_COUNT};
use crate::planner::{compile, PlanError, Planner, PlannerOutput};

pub use events::{BadEvent, Event, EventDetector};
pub use log::{
    csv_bytes, csv_header, decimation_stride, emit_csv, read_csv, write_csv, LogError, LogRow, TickDiagnostics,
    TrajectoryLog,
};
pub use plot::{emit_plots, line_chart, Series};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("scenario is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("t = {time} s, phase `{phase}`: {source}")]
    Control { time: f64, phase: String, source: ControlError },
    #[error("t = {time} s: {source}")]
    Dynamics { time: f64, source: DynamicsError },
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Invalid(_) => "InvalidScenario",
            EngineError::Plan(_) => "PlanError",
            EngineError::Control { source: ControlError::Infeasible(_), .. } => "Infeasible",
            EngineError::Control { .. } => "ControlError",
            EngineError::Dynamics { source: DynamicsError::NonFinite { .. }, .. } => "NonFiniteState",
            EngineError::Dynamics { .. } => "DynamicsError",
        }
    }
}

/// Everything computed during one tick.
#[derive(Debug, Clone)]
pub struct TickRecord {
    pub row: LogRow,
    pub diagnostics: TickDiagnostics,
    pub planner: PlannerOutput,
    pub command: TensionCommand,
    /// Feedforward per wire, scenario order.
    pub feedforward: Vec<f64>,
    /// The state the commands were computed from.
    pub state: SimState,
}

/// A scenario being stepped tick by tick.
pub struct Simulation<'s> {
    scenario: &'s Scenario,
    dynamics: Dynamics<'s>,
    planner: Planner,
    detector: EventDetector,
    state: SimState,
    tick: usize,
    steps: usize,
}

impl<'s> Simulation<'s> {
    pub fn new(scenario: &'s Scenario) -> Result<Self, EngineError> {
        let violations = validate_scenario(scenario);
        if !violations.is_empty() {
            return Err(EngineError::Invalid(violations));
        }
        let dyn_err = |source| EngineError::Dynamics { time: 0.0, source };
        let dynamics = Dynamics::new(scenario).map_err(dyn_err)?;
        let state = dynamics.initial_state().map_err(dyn_err)?;
        let ids: Vec<u8> = scenario.wires.iter().map(|w| w.id).collect();
        let joint_names: Vec<String> = dynamics.model().joints().iter().map(|j| j.name.clone()).collect();
        let initial_joints = dynamics.model().angles_to_map(&state.joint_angles);
        let plan = compile(&scenario.phases, &ids, &state.wire_lengths, &joint_names, &initial_joints)?;
        let planner = Planner::new(plan, &state.wire_lengths);
        Ok(Self {
            scenario,
            dynamics,
            planner,
            detector: EventDetector::new(),
            state,
            tick: 0,
            steps: scenario.step_count(),
        })
    }

    pub fn scenario(&self) -> &'s Scenario {
        self.scenario
    }

    pub fn dynamics(&self) -> &Dynamics<'s> {
        &self.dynamics
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Number of ticks still to run, including the final logged one.
    pub fn remaining(&self) -> usize {
        (self.steps + 1).saturating_sub(self.tick)
    }

    pub fn is_finished(&self) -> bool {
        self.remaining() == 0
    }

    /// Computes commands at the current state, logs it, and (except on the
    /// final tick) integrates one step.
    pub fn tick(&mut self) -> Result<TickRecord, EngineError> {
        let s = self.scenario;
        let dt = s.sim.dt;
        let t = self.state.time;
        let dyn_err = |source| EngineError::Dynamics { time: t, source };
        let snap = self.dynamics.snapshot(&self.state.base_pose, &self.state.joint_angles).map_err(dyn_err)?;
        let contact_force: f64 = if s.contact.enabled {
            self.dynamics.contact_forces(&self.state, &snap).iter().map(|c| c.force.z).sum()
        } else {
            0.0
        };

        let out = self.planner.tick(t, &self.state.wire_lengths, contact_force);
        let ctl_err = |source| EngineError::Control { time: t, phase: out.phase_name.clone(), source };

        let n = s.wires.len();
        let f_max = self.dynamics.f_max();
        let mut feedforward = vec![0.0; n];
        if !out.compensation.is_empty() {
            let idx: Vec<usize> = out
                .compensation
                .iter()
                .map(|id| s.wires.iter().position(|w| w.id == *id).expect("validated"))
                .collect();
            let active: Vec<_> = idx.iter().map(|&i| &snap.geometries[i]).collect();
            let limits: Vec<f64> = idx.iter().map(|&i| f_max[i]).collect();
            let ff = gravity_feedforward(&active, &limits, &snap.composite.com_world, s.constants.weight())
                .map_err(ctl_err)?;
            for (&i, f) in idx.iter().zip(ff.tensions) {
                feedforward[i] = f;
            }
        }

        let l = &self.state.wire_lengths;
        let rates: Vec<f64> =
            (0..n).map(|w| if out.wires.tracking[w] { 0.0 } else { self.state.wire_rates[w] }).collect();
        let pd = pd_tension(&out.wires.l_ref, l, &rates, &s.gains, &feedforward, f_max).map_err(ctl_err)?;
        let command = TensionCommand::new(pd, &s.constants);

        let events = self.detector.detect(t, &snap.frames, s);
        let euler = euler_zyx(&self.state.base_pose.orientation);
        let by_id = |values: &[f64]| {
            let mut a = [None; WIRE_COUNT];
            for (w, v) in s.wires.iter().zip(values) {
                a[w.id as usize] = Some(*v);
            }
            a
        };
        let p = self.state.base_pose.position;
        let row = LogRow {
            t,
            position: [p.x, p.y, p.z],
            rpy: [euler.roll, euler.pitch, euler.yaw],
            lengths: by_id(l),
            f_ref: by_id(&command.f_ref),
            i_ref: by_id(&command.i_ref),
            phase: out.phase_name.clone(),
            events,
        };
        let diagnostics = TickDiagnostics {
            phase_index: out.wires.phase_index,
            wire_rates: by_id(&self.state.wire_rates),
            feedforward: by_id(&feedforward),
            contact_force,
            near_gimbal_lock: euler.near_gimbal_lock,
            waiting_for_sync: out.wires.waiting,
        };

        let current = self.state.clone();
        if self.tick < self.steps {
            let next_t = (self.tick + 1) as f64 * dt;
            let dyn_err = |source| EngineError::Dynamics { time: next_t, source };
            let wrench = self.dynamics.assemble_wrench(&self.state, &snap, &command.f_ref).map_err(dyn_err)?;
            let next_angles = JointAngles(self.planner.plan().joint_targets(next_t));
            let mut next = self
                .dynamics
                .step(&self.state, &snap, &wrench.wrench, &command.f_ref, &next_angles, dt)
                .map_err(dyn_err)?;
            next.time = next_t;
            self.state = next;
        }
        self.tick += 1;
        Ok(TickRecord { row, diagnostics, planner: out, command, feedforward, state: current })
    }
}

/// Runs `scenario` to its duration and returns the full per-tick log.
pub fn run(scenario: &Scenario) -> Result<TrajectoryLog, EngineError> {
    let mut sim = Simulation::new(scenario)?;
    let mut log = TrajectoryLog {
        scenario: scenario.name.clone(),
        dt: scenario.sim.dt,
        rows: Vec::with_capacity(sim.remaining()),
        diagnostics: Vec::with_capacity(sim.remaining()),
    };
    while !sim.is_finished() {
        let rec = sim.tick()?;
        log.rows.push(rec.row);
        log.diagnostics.push(rec.diagnostics);
    }
    Ok(log)
}
