use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::scenario::{Anchor, PointRef, Scenario, WIRE_COUNT};

/// A broken scenario invariant. The variant name is the machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveConstant(&'static str),
    NoSegments,
    DuplicateSegment(String),
    NegativeMass(String),
    ZeroTotalMass,
    InertiaNotPsd(String),
    DuplicateJoint(String),
    UnknownSegment { context: String, segment: String },
    AxisNotUnit(String),
    LimitsUnordered(String),
    MultipleParents(String),
    JointTreeInvalid(String),
    NoWires,
    WireIdOutOfRange(u8),
    DuplicateWireId(u8),
    UnresolvedPoint { wire: Option<u8>, point: PointRef },
    InternalWireSameSegment(u8),
    NonPositiveWireLimit(u8),
    InvalidGains,
    TimestepOutOfRange,
    NonPositiveDuration,
    NoPhases,
    NonPositivePhaseDuration(usize),
    UnknownWire { phase: usize, wire: u8 },
    CompensationNotEnvironment { phase: usize, wire: u8 },
    UnknownJoint { context: String, joint: String },
    JointTargetOutOfLimits { context: String, joint: String },
    NonPositiveContactThreshold(usize),
    InvalidContactParams,
    DegenerateKickPlane,
}

impl Violation {
    /// Stable code, identical to the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NonPositiveConstant(_) => "NonPositiveConstant",
            Violation::NoSegments => "NoSegments",
            Violation::DuplicateSegment(_) => "DuplicateSegment",
            Violation::NegativeMass(_) => "NegativeMass",
            Violation::ZeroTotalMass => "ZeroTotalMass",
            Violation::InertiaNotPsd(_) => "InertiaNotPsd",
            Violation::DuplicateJoint(_) => "DuplicateJoint",
            Violation::UnknownSegment { .. } => "UnknownSegment",
            Violation::AxisNotUnit(_) => "AxisNotUnit",
            Violation::LimitsUnordered(_) => "LimitsUnordered",
            Violation::MultipleParents(_) => "MultipleParents",
            Violation::JointTreeInvalid(_) => "JointTreeInvalid",
            Violation::NoWires => "NoWires",
            Violation::WireIdOutOfRange(_) => "WireIdOutOfRange",
            Violation::DuplicateWireId(_) => "DuplicateWireId",
            Violation::UnresolvedPoint { .. } => "UnresolvedPoint",
            Violation::InternalWireSameSegment(_) => "InternalWireSameSegment",
            Violation::NonPositiveWireLimit(_) => "NonPositiveWireLimit",
            Violation::InvalidGains => "InvalidGains",
            Violation::TimestepOutOfRange => "TimestepOutOfRange",
            Violation::NonPositiveDuration => "NonPositiveDuration",
            Violation::NoPhases => "NoPhases",
            Violation::NonPositivePhaseDuration(_) => "NonPositivePhaseDuration",
            Violation::UnknownWire { .. } => "UnknownWire",
            Violation::CompensationNotEnvironment { .. } => "CompensationNotEnvironment",
            Violation::UnknownJoint { .. } => "UnknownJoint",
            Violation::JointTargetOutOfLimits { .. } => "JointTargetOutOfLimits",
            Violation::NonPositiveContactThreshold(_) => "NonPositiveContactThreshold",
            Violation::InvalidContactParams => "InvalidContactParams",
            Violation::DegenerateKickPlane => "DegenerateKickPlane",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.code())?;
        match self {
            Violation::NonPositiveConstant(name) => write!(f, "constants.{name} must be > 0"),
            Violation::NoSegments => write!(f, "at least one segment is required"),
            Violation::DuplicateSegment(s) => write!(f, "segment `{s}` defined twice"),
            Violation::NegativeMass(s) => write!(f, "segments.{s}.mass is negative"),
            Violation::ZeroTotalMass => write!(f, "segment masses sum to zero"),
            Violation::InertiaNotPsd(s) => {
                write!(f, "segments.{s}.inertia is not symmetric positive semidefinite")
            }
            Violation::DuplicateJoint(j) => write!(f, "joint `{j}` defined twice"),
            Violation::UnknownSegment { context, segment } => {
                write!(f, "{context} references unknown segment `{segment}`")
            }
            Violation::AxisNotUnit(j) => write!(f, "joints.{j}.axis is not unit length"),
            Violation::LimitsUnordered(j) => write!(f, "joints.{j}.limits are not ordered"),
            Violation::MultipleParents(s) => write!(f, "segment `{s}` is the child of several joints"),
            Violation::JointTreeInvalid(why) => write!(f, "joint tree: {why}"),
            Violation::NoWires => write!(f, "at least one wire is required"),
            Violation::WireIdOutOfRange(id) => {
                write!(f, "wire id out of range 0–{} (got {id})", WIRE_COUNT - 1)
            }
            Violation::DuplicateWireId(id) => write!(f, "wire id {id} used more than once"),
            Violation::UnresolvedPoint { wire: Some(id), point } => {
                write!(f, "wire {id} references unknown point `{point}`")
            }
            Violation::UnresolvedPoint { wire: None, point } => {
                write!(f, "kick_target.foot references unknown point `{point}`")
            }
            Violation::InternalWireSameSegment(id) => {
                write!(f, "body-anchored wire {id} has exit and anchor on the same segment")
            }
            Violation::NonPositiveWireLimit(id) => write!(f, "wires.{id}.f_max must be > 0"),
            Violation::InvalidGains => write!(f, "gains need kp > 0 and kd >= 0"),
            Violation::TimestepOutOfRange => write!(f, "sim.dt must lie in (0, 0.01]"),
            Violation::NonPositiveDuration => write!(f, "sim.duration must be > 0"),
            Violation::NoPhases => write!(f, "at least one phase is required"),
            Violation::NonPositivePhaseDuration(i) => write!(f, "phases[{i}].duration must be > 0"),
            Violation::UnknownWire { phase, wire } => {
                write!(f, "phases[{phase}] references unknown wire {wire}")
            }
            Violation::CompensationNotEnvironment { phase, wire } => {
                write!(f, "phases[{phase}].compensation wire {wire} is not environment-anchored")
            }
            Violation::UnknownJoint { context, joint } => {
                write!(f, "{context} references unknown joint `{joint}`")
            }
            Violation::JointTargetOutOfLimits { context, joint } => {
                write!(f, "{context} drives joint `{joint}` outside its limits")
            }
            Violation::NonPositiveContactThreshold(i) => {
                write!(f, "phases[{i}].stop_on_contact_force must be > 0")
            }
            Violation::InvalidContactParams => write!(f, "contact parameters must be >= 0"),
            Violation::DegenerateKickPlane => write!(f, "kick_target.normal must be non-zero"),
        }
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Checks every scenario invariant; an empty list means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    let c = &s.constants;
    for (name, v) in [
        ("gravity", c.gravity),
        ("total_mass", c.total_mass),
        ("f_max_per_wire", c.f_max_per_wire),
        ("wind_rate_max", c.wind_rate_max),
        ("pulley_radius", c.pulley_radius),
        ("torque_constant", c.torque_constant),
        ("gear_ratio", c.gear_ratio),
    ] {
        if !positive(v) {
            out.push(Violation::NonPositiveConstant(name));
        }
    }

    check_segments(s, &mut out);
    check_joints(s, &mut out);
    check_wires(s, &mut out);

    if !(positive(s.gains.kp) && s.gains.kd.is_finite() && s.gains.kd >= 0.0) {
        out.push(Violation::InvalidGains);
    }
    if !(s.sim.dt.is_finite() && s.sim.dt > 0.0 && s.sim.dt <= 0.01) {
        out.push(Violation::TimestepOutOfRange);
    }
    if let Some(d) = s.sim.duration {
        if !positive(d) {
            out.push(Violation::NonPositiveDuration);
        }
    }
    for (joint, angle) in &s.sim.initial_joints {
        check_joint_angle(s, "sim.initial_joints", joint, *angle, &mut out);
    }

    check_phases(s, &mut out);

    let k = &s.contact;
    if [k.stiffness, k.damping, k.viscous_friction].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        out.push(Violation::InvalidContactParams);
    }
    if let Some(target) = &s.kick_target {
        if !(target.normal.norm() > 1e-12) {
            out.push(Violation::DegenerateKickPlane);
        }
        if !point_exists(s, &target.foot) {
            out.push(Violation::UnresolvedPoint { wire: None, point: target.foot.clone() });
        }
    }
    out
}

fn check_segments(s: &Scenario, out: &mut Vec<Violation>) {
    if s.segments.is_empty() {
        out.push(Violation::NoSegments);
        return;
    }
    let mut seen = BTreeSet::new();
    for seg in &s.segments {
        if !seen.insert(seg.name.as_str()) {
            out.push(Violation::DuplicateSegment(seg.name.clone()));
        }
        if !(seg.mass.is_finite() && seg.mass >= 0.0) {
            out.push(Violation::NegativeMass(seg.name.clone()));
        }
        let inertia = seg.inertia_matrix();
        let scale = inertia.abs().max().max(1.0);
        let symmetric = (inertia - inertia.transpose()).abs().max() <= 1e-9 * scale;
        let psd = symmetric
            && inertia.iter().all(|v| v.is_finite())
            && inertia.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12 * scale);
        if !psd {
            out.push(Violation::InertiaNotPsd(seg.name.clone()));
        }
    }
    if !(s.segments.iter().map(|seg| seg.mass).sum::<f64>() > 0.0) {
        out.push(Violation::ZeroTotalMass);
    }
}

fn check_joints(s: &Scenario, out: &mut Vec<Violation>) {
    let mut names = BTreeSet::new();
    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    for j in &s.joints {
        if !names.insert(j.name.as_str()) {
            out.push(Violation::DuplicateJoint(j.name.clone()));
        }
        for seg in [&j.parent, &j.child] {
            if s.segment(seg).is_none() {
                out.push(Violation::UnknownSegment { context: format!("joints.{}", j.name), segment: seg.clone() });
            }
        }
        if !((j.axis.norm() - 1.0).abs() <= 1e-9) {
            out.push(Violation::AxisNotUnit(j.name.clone()));
        }
        if !(j.limits[0] <= j.limits[1]) {
            out.push(Violation::LimitsUnordered(j.name.clone()));
        }
        if parent_of.insert(j.child.as_str(), j.parent.as_str()).is_some() {
            out.push(Violation::MultipleParents(j.child.clone()));
        }
    }
    if s.segments.is_empty() {
        return;
    }
    let roots: Vec<_> = s.segments.iter().filter(|seg| !parent_of.contains_key(seg.name.as_str())).collect();
    if roots.len() != 1 {
        out.push(Violation::JointTreeInvalid(format!("expected exactly one root segment, found {}", roots.len())));
    }
    // Walk up from each segment; a walk longer than the segment count is a cycle.
    for seg in &s.segments {
        let mut cur = seg.name.as_str();
        let mut steps = 0;
        while let Some(p) = parent_of.get(cur) {
            cur = p;
            steps += 1;
            if steps > s.segments.len() {
                out.push(Violation::JointTreeInvalid(format!("cycle through `{}`", seg.name)));
                break;
            }
        }
    }
}

fn point_exists(s: &Scenario, p: &PointRef) -> bool {
    s.segment(&p.segment).is_some_and(|seg| seg.point(&p.point).is_some())
}

fn check_wires(s: &Scenario, out: &mut Vec<Violation>) {
    if s.wires.is_empty() {
        out.push(Violation::NoWires);
    }
    let mut ids = BTreeSet::new();
    for w in &s.wires {
        if usize::from(w.id) >= WIRE_COUNT {
            out.push(Violation::WireIdOutOfRange(w.id));
        }
        if !ids.insert(w.id) {
            out.push(Violation::DuplicateWireId(w.id));
        }
        let mut refs = vec![&w.exit];
        refs.extend(w.via.iter());
        if let Anchor::Body(p) = &w.anchor {
            refs.push(p);
            if p.segment == w.exit.segment {
                out.push(Violation::InternalWireSameSegment(w.id));
            }
        }
        for p in refs {
            if !point_exists(s, p) {
                out.push(Violation::UnresolvedPoint { wire: Some(w.id), point: p.clone() });
            }
        }
        if let Some(f) = w.f_max {
            if !positive(f) {
                out.push(Violation::NonPositiveWireLimit(w.id));
            }
        }
    }
}

fn check_joint_angle(s: &Scenario, context: &str, joint: &str, angle: f64, out: &mut Vec<Violation>) {
    match s.joint(joint) {
        None => out.push(Violation::UnknownJoint { context: context.into(), joint: joint.into() }),
        Some(j) => {
            if !(angle >= j.limits[0] && angle <= j.limits[1]) {
                out.push(Violation::JointTargetOutOfLimits { context: context.into(), joint: joint.into() });
            }
        }
    }
}

fn check_phases(s: &Scenario, out: &mut Vec<Violation>) {
    if s.phases.is_empty() {
        out.push(Violation::NoPhases);
    }
    for (i, phase) in s.phases.iter().enumerate() {
        if !positive(phase.duration) {
            out.push(Violation::NonPositivePhaseDuration(i));
        }
        for &id in phase.wires.keys() {
            if s.wire(id).is_none() {
                out.push(Violation::UnknownWire { phase: i, wire: id });
            }
        }
        for &id in &phase.compensation {
            match s.wire(id) {
                None => out.push(Violation::UnknownWire { phase: i, wire: id }),
                Some(w) if w.is_internal() => out.push(Violation::CompensationNotEnvironment { phase: i, wire: id }),
                Some(_) => {}
            }
        }
        let context = format!("phases[{i}].joints");
        for (joint, angle) in &phase.joints {
            check_joint_angle(s, &context, joint, *angle, out);
        }
        if let Some(f) = phase.stop_on_contact_force {
            if !positive(f) {
                out.push(Violation::NonPositiveContactThreshold(i));
            }
        }
    }
}
