use super::plan::{ramp, CompiledPlan, WireSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerId {
    Musashi,
    Cubix,
}

/// Phase announcement. A message emitted at tick `k` is visible to the other
/// planner from tick `k + 1` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncMessage {
    pub sender: PlannerId,
    pub phase_index: usize,
    pub timestamp: f64,
}

/// Musashi side: joint targets on the nominal schedule, announcing each phase
/// as it begins.
#[derive(Debug, Clone)]
pub struct MusashiPlanner {
    announced: Option<usize>,
}

impl MusashiPlanner {
    pub fn new() -> Self {
        Self { announced: None }
    }

    pub fn last_announced(&self) -> Option<usize> {
        self.announced
    }

    pub fn tick(&mut self, plan: &CompiledPlan, t: f64) -> (Vec<f64>, Option<SyncMessage>) {
        let (k, _) = plan.locate(t);
        let msg = (self.announced != Some(k)).then(|| {
            self.announced = Some(k);
            SyncMessage { sender: PlannerId::Musashi, phase_index: k, timestamp: t }
        });
        (plan.joint_targets(t), msg)
    }
}

impl Default for MusashiPlanner {
    fn default() -> Self {
        Self::new()
    }
}

/// CubiX side: wire targets. Phase changes happen on time unless the next
/// phase has a barrier and Musashi has not announced it yet; the delayed
/// phase then starts at the tick where the announcement arrives.
#[derive(Debug, Clone)]
pub struct CubixPlanner {
    phase: usize,
    phase_start: f64,
    waiting: bool,
    frozen_tau: Option<f64>,
    /// Start value of each wire's ramp in the current phase.
    base: Vec<f64>,
    heard: Option<usize>,
}

/// Wire commands for one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct CubixCommand {
    pub phase_index: usize,
    /// Target length per wire; for tracking wires this is the measured length.
    pub l_ref: Vec<f64>,
    pub tracking: Vec<bool>,
    pub waiting: bool,
    pub frozen: bool,
}

impl CubixPlanner {
    pub fn new(initial_lengths: &[f64]) -> Self {
        Self {
            phase: 0,
            phase_start: 0.0,
            waiting: false,
            frozen_tau: None,
            base: initial_lengths.to_vec(),
            heard: None,
        }
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn phase_start(&self) -> f64 {
        self.phase_start
    }

    fn tau(&self, plan: &CompiledPlan, t: f64) -> f64 {
        let d = plan.durations[self.phase];
        let tau = (t - self.phase_start).clamp(0.0, d);
        self.frozen_tau.map_or(tau, |f| tau.min(f))
    }

    fn value(&self, plan: &CompiledPlan, w: usize, tau: f64, measured: &[f64]) -> f64 {
        match plan.wires[w][self.phase] {
            WireSegment::Ramp { delta, .. } => ramp(self.base[w], delta, tau, plan.durations[self.phase]),
            WireSegment::Track { .. } => measured[w],
        }
    }

    fn advance(&mut self, plan: &CompiledPlan, start: f64, measured: &[f64]) {
        let d = plan.durations[self.phase];
        let end_tau = self.frozen_tau.map_or(d, |f| f.min(d));
        for w in 0..self.base.len() {
            self.base[w] = match plan.wires[w][self.phase] {
                WireSegment::Ramp { delta, .. } if end_tau == d => self.base[w] + delta,
                _ => self.value(plan, w, end_tau, measured),
            };
        }
        self.phase += 1;
        self.phase_start = start;
        self.frozen_tau = None;
        self.waiting = false;
    }

    /// `measured` holds the current wire lengths, `contact_force` the total
    /// ground normal force.
    pub fn tick(
        &mut self,
        plan: &CompiledPlan,
        t: f64,
        inbox: &[SyncMessage],
        measured: &[f64],
        contact_force: f64,
    ) -> CubixCommand {
        for m in inbox.iter().filter(|m| m.sender == PlannerId::Musashi) {
            self.heard = Some(self.heard.map_or(m.phase_index, |h| h.max(m.phase_index)));
        }
        while self.phase + 1 < plan.phase_count() {
            let end = self.phase_start + plan.durations[self.phase];
            if t < end {
                break;
            }
            let next = self.phase + 1;
            if plan.sync_barrier[next] && self.heard.is_none_or(|h| h < next) {
                self.waiting = true;
                break;
            }
            let start = if self.waiting { t } else { end };
            self.advance(plan, start, measured);
        }

        if let Some(threshold) = plan.stop_on_contact_force[self.phase] {
            if self.frozen_tau.is_none() && contact_force >= threshold {
                self.frozen_tau = Some(self.tau(plan, t));
            }
        }

        let tau = self.tau(plan, t);
        let n = self.base.len();
        let tracking: Vec<bool> =
            (0..n).map(|w| matches!(plan.wires[w][self.phase], WireSegment::Track { .. })).collect();
        CubixCommand {
            phase_index: self.phase,
            l_ref: (0..n).map(|w| self.value(plan, w, tau, measured)).collect(),
            tracking,
            waiting: self.waiting,
            frozen: self.frozen_tau.is_some(),
        }
    }
}

/// Both planners plus the one-tick message channel between them.
#[derive(Debug, Clone)]
pub struct Planner {
    plan: CompiledPlan,
    musashi: MusashiPlanner,
    cubix: CubixPlanner,
    in_flight: Vec<SyncMessage>,
    delivered: Vec<SyncMessage>,
}

/// Everything the controller needs for one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerOutput {
    pub wires: CubixCommand,
    pub joint_targets: Vec<f64>,
    pub compensation: Vec<u8>,
    pub phase_name: String,
    pub musashi_phase: usize,
    pub emitted: Option<SyncMessage>,
}

impl Planner {
    pub fn new(plan: CompiledPlan, initial_lengths: &[f64]) -> Self {
        Self {
            plan,
            musashi: MusashiPlanner::new(),
            cubix: CubixPlanner::new(initial_lengths),
            in_flight: Vec::new(),
            delivered: Vec::new(),
        }
    }

    pub fn plan(&self) -> &CompiledPlan {
        &self.plan
    }

    /// Messages delivered to CubiX so far, in arrival order.
    pub fn delivered(&self) -> &[SyncMessage] {
        &self.delivered
    }

    pub fn tick(&mut self, t: f64, measured: &[f64], contact_force: f64) -> PlannerOutput {
        let inbox = std::mem::take(&mut self.in_flight);
        self.delivered.extend_from_slice(&inbox);
        let (joint_targets, emitted) = self.musashi.tick(&self.plan, t);
        let wires = self.cubix.tick(&self.plan, t, &inbox, measured, contact_force);
        self.in_flight.extend(emitted);
        let k = wires.phase_index;
        PlannerOutput {
            compensation: self.plan.compensation[k].clone(),
            phase_name: self.plan.names[k].clone(),
            musashi_phase: self.musashi.last_announced().unwrap_or(0),
            wires,
            joint_targets,
            emitted,
        }
    }
}
