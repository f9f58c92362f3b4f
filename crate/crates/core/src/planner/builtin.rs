//! Built-in scenarios: pull-up, rising from prone, and kick.
//!
//! The body dimensions, cube corner layout, and anchor positions are invented
//! and recorded in each scenario's `assumptions`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::control::{gravity_feedforward, joint_torque_budget};
use crate::kinematics::{forward_kinematics, wire_geometry, BodyModel, JointAngles};
use crate::model::{
    Anchor, BodySegment, ContactParams, ControllerGains, InitialPose, KickTarget, Phase, PhysicalConstants, PointRef,
    Pose, RevoluteJoint, Scenario, SimSettings, Wire, WireTarget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BuiltinScenario {
    PullUp,
    Rising,
    Kick,
}

impl BuiltinScenario {
    pub const ALL: [BuiltinScenario; 3] = [Self::PullUp, Self::Rising, Self::Kick];

    pub fn name(self) -> &'static str {
        match self {
            Self::PullUp => "pull_up",
            Self::Rising => "rising",
            Self::Kick => "kick",
        }
    }
}

impl fmt::Display for BuiltinScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownBuiltin(pub String);

impl fmt::Display for UnknownBuiltin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown built-in scenario `{}` (expected pull_up, rising, or kick)", self.0)
    }
}

impl std::error::Error for UnknownBuiltin {}

impl FromStr for BuiltinScenario {
    type Err = UnknownBuiltin;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|b| b.name() == s.replace('-', "_")).ok_or_else(|| UnknownBuiltin(s.to_string()))
    }
}

pub fn builtin_scenario(which: BuiltinScenario) -> Scenario {
    match which {
        BuiltinScenario::PullUp => pull_up(),
        BuiltinScenario::Rising => rising(),
        BuiltinScenario::Kick => kick(),
    }
}

const CUBE_HALF: f64 = 0.15;
const BASE: &str = "cubix";
/// Base height that leaves the feet 5 cm above the floor when standing.
const HANG_HEIGHT: f64 = 0.93;
const CEILING: f64 = 3.2;

fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

fn diag(x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
    [[x, 0.0, 0.0], [0.0, y, 0.0], [0.0, 0.0, z]]
}

/// Exit corner of winch module `id`, in the base frame (x forward, y left).
fn corner(id: u8) -> Vector3<f64> {
    let h = CUBE_HALF;
    match id {
        0 => v(h, -h, -h),
        1 => v(h, h, -h),
        2 => v(-h, -h, -h),
        3 => v(-h, -h, h),
        4 => v(-h, h, h),
        5 => v(-h, h, -h),
        6 => v(h, -h, h),
        7 => v(h, h, h),
        _ => unreachable!("eight modules"),
    }
}

fn exit(id: u8) -> PointRef {
    PointRef::new(BASE, format!("w{id}"))
}

fn segment(name: &str, mass: f64, com: Vector3<f64>, inertia: [[f64; 3]; 3]) -> BodySegment {
    BodySegment { name: name.into(), mass, com, inertia, points: BTreeMap::new(), contact_points: BTreeMap::new() }
}

fn joint(name: &str, parent: &str, child: &str, origin: Vector3<f64>, limits: [f64; 2]) -> RevoluteJoint {
    RevoluteJoint {
        name: name.into(),
        parent: parent.into(),
        child: child.into(),
        origin,
        axis: Vector3::y(),
        limits,
        torque_limit: None,
    }
}

/// Cube with the pelvis, torso, head, and two legs. Standing, the feet are
/// 0.88 m below the cube center and the head top 0.72 m above it.
fn body() -> (Vec<BodySegment>, Vec<RevoluteJoint>) {
    let mut cube = segment(BASE, 14.6, Vector3::zeros(), diag(0.219, 0.219, 0.219));
    for id in 0..8 {
        cube.points.insert(format!("w{id}"), corner(id));
    }
    cube.points.insert("pulley_r".into(), v(-CUBE_HALF, -0.12, CUBE_HALF));
    cube.points.insert("pulley_l".into(), v(-CUBE_HALF, 0.12, CUBE_HALF));
    cube.contact_points.insert("pelvis_front".into(), v(CUBE_HALF, 0.0, -0.05));
    cube.contact_points.insert("pelvis_back".into(), v(-CUBE_HALF, 0.0, -0.05));

    let mut torso = segment("torso", 12.0, v(0.0, 0.0, 0.2), diag(0.332, 0.2425, 0.1696));
    torso.points.insert("shoulder_r".into(), v(0.10, -0.18, 0.40));
    torso.points.insert("shoulder_l".into(), v(0.10, 0.18, 0.40));
    torso.contact_points.insert("chest".into(), v(0.12, 0.0, 0.25));

    let mut head = segment("head", 4.0, v(0.0, 0.0, 0.1), diag(0.02, 0.02, 0.02));
    head.contact_points.insert("face".into(), v(0.1, 0.0, 0.1));
    head.contact_points.insert("crown".into(), v(0.0, 0.0, 0.12));

    let leg = |side: &str| {
        let mut l = segment(&format!("leg_{side}"), 7.0, v(0.0, 0.0, -0.35), diag(0.286, 0.286, 0.02));
        l.contact_points.insert("knee".into(), v(0.06, 0.0, -0.35));
        l.contact_points.insert("heel".into(), v(-0.05, 0.0, -0.73));
        l.contact_points.insert("toe".into(), v(0.15, 0.0, -0.73));
        l
    };

    let joints = vec![
        joint("waist", BASE, "torso", v(0.0, 0.0, CUBE_HALF), [-0.5, 1.2]),
        joint("neck", "torso", "head", v(0.0, 0.0, 0.45), [-0.8, 0.8]),
        joint("hip_r", BASE, "leg_r", v(0.0, -0.09, -CUBE_HALF), [-1.8, 0.6]),
        joint("hip_l", BASE, "leg_l", v(0.0, 0.09, -CUBE_HALF), [-1.8, 0.6]),
    ];
    (vec![cube, torso, head, leg("r"), leg("l")], joints)
}

fn environment_wire(id: u8, anchor: Vector3<f64>) -> Wire {
    Wire { id, exit: exit(id), via: vec![], anchor: Anchor::Environment(anchor), f_max: None }
}

fn scenario(name: &str, assumptions: &[&str], wires: Vec<Wire>, phases: Vec<Phase>, sim: SimSettings) -> Scenario {
    let (segments, joints) = body();
    Scenario {
        name: name.into(),
        assumptions: assumptions.iter().map(|s| s.to_string()).collect(),
        constants: PhysicalConstants::default(),
        segments,
        joints,
        wires,
        gains: ControllerGains::default(),
        phases,
        sim,
        contact: ContactParams::default(),
        kick_target: None,
    }
}

fn phase(name: &str, duration: f64) -> Phase {
    Phase {
        name: name.into(),
        duration,
        wires: BTreeMap::new(),
        compensation: vec![],
        joints: BTreeMap::new(),
        sync_barrier: false,
        stop_on_contact_force: None,
    }
}

fn standing_at(position: Vector3<f64>) -> SimSettings {
    SimSettings { initial_pose: InitialPose { position, rpy: Vector3::zeros() }, ..SimSettings::default() }
}

/// Horizontal offset of ceiling anchors outward from the exits they serve.
/// A splayed set of wires can always cancel small horizontal forces, which
/// parallel vertical wires cannot once the body drifts.
const SPLAY: f64 = 0.25;

fn outward(c: f64) -> f64 {
    c + SPLAY * c.signum()
}

/// Ceiling wire above its exit, splayed outward.
fn splayed_wire(id: u8) -> Wire {
    let c = corner(id);
    environment_wire(id, v(outward(c.x), outward(c.y), CEILING))
}

/// Height the pull-up raises the base.
pub const PULL_UP_RISE: f64 = 0.53;

fn pull_up() -> Scenario {
    let wires = [3, 4, 6, 7]
        .map(|id| {
            let c = corner(id);
            environment_wire(id, v(c.x, c.y, CEILING))
        })
        .to_vec();
    let mut sim = standing_at(v(0.0, 0.0, HANG_HEIGHT));
    sim.duration = Some(45.0);
    let mut s = scenario(
        "pull_up",
        &[
            "robot starts hanging with the feet 5 cm above the floor",
            "wires 3, 4, 6, 7 leave the top corners of the cube vertically for a ceiling at z = 3.2 m",
            "all four wires wind by the length change of a 0.53 m vertical rise over 40 s, then hold for 5 s",
        ],
        wires,
        vec![],
        sim,
    );
    let probe = Probe::new(&s);
    let start = Pose::from_rpy(v(0.0, 0.0, HANG_HEIGHT), 0.0, 0.0, 0.0);
    let top = Pose::from_rpy(v(0.0, 0.0, HANG_HEIGHT + PULL_UP_RISE), 0.0, 0.0, 0.0);
    let none = BTreeMap::new();
    let mut lift = phase("pull_up", 40.0);
    lift.compensation = vec![3, 4, 6, 7];
    lift.wires = [3u8, 4, 6, 7]
        .into_iter()
        .map(|id| (id, WireTarget::Delta(probe.length(id, &top, &none) - probe.length(id, &start, &none))))
        .collect();
    s.phases = vec![lift];
    s
}

/// Hover with `n` symmetric vertical wires (1, 3, or 4) for the weight-share
/// check. A single phase holds every target.
pub fn hover_scenario(n: usize) -> Scenario {
    let mut s = pull_up();
    s.name = format!("hover_{n}");
    s.assumptions = vec![format!("{n} vertical wires placed symmetrically about the center of mass")];
    let ids: Vec<u8> = match n {
        4 => vec![3, 4, 6, 7],
        3 => vec![3, 4, 6],
        1 => vec![3],
        _ => panic!("hover is defined for 1, 3, or 4 wires"),
    };
    if n != 4 {
        // Spread the exits evenly around the center of the top face.
        let cube = &mut s.segments[0];
        s.wires = ids
            .iter()
            .enumerate()
            .map(|(k, &id)| {
                let p = if n == 1 {
                    v(0.0, 0.0, CUBE_HALF)
                } else {
                    let a = std::f64::consts::TAU * k as f64 / n as f64;
                    v(CUBE_HALF * a.cos(), CUBE_HALF * a.sin(), CUBE_HALF)
                };
                let name = format!("top{k}");
                cube.points.insert(name.clone(), p);
                Wire {
                    id,
                    exit: PointRef::new(BASE, name),
                    via: vec![],
                    anchor: Anchor::Environment(v(p.x, p.y, CEILING)),
                    f_max: None,
                }
            })
            .collect();
    }
    let mut hold = phase("hover", 2.0);
    hold.compensation = ids;
    s.phases = vec![hold];
    s.sim.duration = None;
    s.contact.enabled = false;
    s
}

/// Geometry helper for planning: world positions and wire lengths of a
/// hypothetical pose of a scenario's body.
struct Probe<'a> {
    scenario: &'a Scenario,
    model: BodyModel,
}

impl<'a> Probe<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        Self { scenario, model: BodyModel::from_scenario(scenario).expect("built-in body is valid") }
    }

    fn angles(&self, joints: &BTreeMap<String, f64>) -> JointAngles {
        self.model.angles_from_map(joints).expect("built-in joints are valid")
    }

    fn point(&self, pose: &Pose, joints: &BTreeMap<String, f64>, p: &PointRef) -> Vector3<f64> {
        let f = forward_kinematics(pose, &self.angles(joints), &self.model).expect("within limits");
        f.point(p).expect("built-in point")
    }

    fn lowest_contact(&self, pose: &Pose, joints: &BTreeMap<String, f64>) -> f64 {
        let f = forward_kinematics(pose, &self.angles(joints), &self.model).expect("within limits");
        f.contact_points().map(|(_, _, p)| p.z).fold(f64::INFINITY, f64::min)
    }

    fn length(&self, id: u8, pose: &Pose, joints: &BTreeMap<String, f64>) -> f64 {
        let f = forward_kinematics(pose, &self.angles(joints), &self.model).expect("within limits");
        wire_geometry(self.scenario.wire(id).expect("wire"), &f).expect("geometry").total_length
    }

    /// Pitching moment about the COM left by the feedforward of `set`.
    fn pitching_moment(&self, pose: &Pose, joints: &BTreeMap<String, f64>, set: &[u8]) -> f64 {
        let f = forward_kinematics(pose, &self.angles(joints), &self.model).expect("within limits");
        let geometries: Vec<_> =
            set.iter().map(|&id| wire_geometry(self.scenario.wire(id).expect("wire"), &f).expect("geometry")).collect();
        let active: Vec<_> = geometries.iter().collect();
        let limits = vec![self.scenario.constants.f_max_per_wire; active.len()];
        let com = crate::kinematics::composite_properties(&f).com_world;
        match gravity_feedforward(&active, &limits, &com, self.scenario.constants.weight()) {
            Ok(ff) => ff.moment_residual.y,
            Err(_) => f64::NAN,
        }
    }

    /// Waist torque at rest in `pose` with the compensating wires carrying
    /// their feedforward and the body wires pulling `internal` newtons each.
    fn waist_torque(&self, pose: &Pose, joints: &BTreeMap<String, f64>, compensation: &[u8], internal: f64) -> f64 {
        let f = forward_kinematics(pose, &self.angles(joints), &self.model).expect("within limits");
        let geometries: Vec<_> = self.scenario.wires.iter().map(|w| wire_geometry(w, &f).expect("geometry")).collect();
        let active: Vec<_> = geometries.iter().filter(|g| compensation.contains(&g.wire_id)).collect();
        let limits = vec![self.scenario.constants.f_max_per_wire; active.len()];
        let com = crate::kinematics::composite_properties(&f).com_world;
        let ff = gravity_feedforward(&active, &limits, &com, self.scenario.constants.weight()).expect("feasible");
        let tensions: Vec<f64> = geometries
            .iter()
            .map(|g| {
                if g.internal {
                    internal
                } else {
                    compensation.iter().position(|&id| id == g.wire_id).map_or(0.0, |k| ff.tensions[k])
                }
            })
            .collect();
        joint_torque_budget("waist", &f, &geometries, &tensions, self.scenario.constants.gravity)
            .expect("waist")
            .required
    }
}

fn joints(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

const PRONE_PITCH: f64 = 1.5;
const PRONE_CLEARANCE: f64 = 0.03;
const LIFT: f64 = 0.8;
const STAND_CLEARANCE: f64 = 0.10;
const WIRE_TOP: f64 = 3.0;
/// Extra length paid out on wires 2 and 5 during rotation so they are slack
/// by the time landing drops them from the feedforward.
const RELEASE: f64 = 0.2;
/// Slight backward lean of the planned upright pose; the toes touch first
/// on landing and tip the body forward by about as much.
const UPRIGHT_PITCH: f64 = -0.03;
/// Wire damping for rising. The feedforward set changes when rotation
/// starts, and the default damping lets the swing exceed the winch speed.
const RISING_KD: f64 = 150.0;

fn rising() -> Scenario {
    let standing = joints(&[("waist", 0.0), ("neck", 0.0), ("hip_r", 0.0), ("hip_l", 0.0)]);
    let folded = joints(&[("waist", 0.0), ("neck", 0.4), ("hip_r", -0.6), ("hip_l", -0.6)]);

    let shoulder = |id: u8| PointRef::new("torso", if id.is_multiple_of(2) { "shoulder_r" } else { "shoulder_l" });
    let mut s = scenario(
        "rising",
        &[
            "robot starts prone at pitch 1.5 rad, lowest point 3 cm above the floor",
            "wires 2-5 leave the back corners; wires 6-7 pass over the front of the shoulders",
            "anchors sit at z = 3.0 m and 0.25 m outward sideways; wires 3-4 lean forward by 0.2 m per meter of drop, wires 2-5 lean back so wires 2-5 leave no pitching moment prone, and wires 6-7 lean back so wires 3, 4, 6, 7 leave none upright",
            "wires 0-1 run inside the body from the front-bottom corners over pulleys at the back edge of the top face to the shoulders, pulling the torso back, and are pretensioned during lifting",
            "lifting raises the prone body 0.8 m; rotation swings it to stand 0.1 m above the floor leaning back 0.03 rad while wires 2 and 5 pay out 0.2 m extra; landing drops wires 2 and 5 from the feedforward",
            "landing lowers the body until the feet carry half the weight",
            "wire damping is raised to 150 N·s/m so the swing at the start of rotation stays under the winch speed",
        ],
        vec![],
        vec![],
        SimSettings::default(),
    );
    for id in [0u8, 1] {
        let pulley = PointRef::new(BASE, if id.is_multiple_of(2) { "pulley_r" } else { "pulley_l" });
        s.wires.push(Wire { id, exit: exit(id), via: vec![pulley], anchor: Anchor::Body(shoulder(id)), f_max: None });
    }
    for id in [2u8, 3, 4, 5] {
        s.wires.push(environment_wire(id, Vector3::zeros()));
    }
    for id in [6u8, 7] {
        s.wires.push(Wire {
            id,
            exit: exit(id),
            via: vec![shoulder(id)],
            anchor: Anchor::Environment(Vector3::zeros()),
            f_max: None,
        });
    }

    // Key poses: prone just above the floor, lifted, and upright pivoting
    // about the top-back edge of the cube.
    let body_only = s.clone();
    let probe = Probe::new(&body_only);
    let mut prone = Pose::from_rpy(Vector3::zeros(), 0.0, PRONE_PITCH, 0.0);
    prone.position.z = PRONE_CLEARANCE - probe.lowest_contact(&prone, &standing);
    let mut lifted = prone;
    lifted.position.z += LIFT;
    let pivot = (probe.point(&lifted, &folded, &exit(3)) + probe.point(&lifted, &folded, &exit(4))) / 2.0;
    let mut upright = Pose::from_rpy(Vector3::zeros(), 0.0, UPRIGHT_PITCH, 0.0);
    upright.position.x = pivot.x + CUBE_HALF;
    upright.position.z = STAND_CLEARANCE - probe.lowest_contact(&upright, &standing);
    let mut landed = upright;
    landed.position.z -= STAND_CLEARANCE + 0.05;

    // Wires 3-4 lean forward by a fixed amount; 6-7 lean back by whatever
    // balances the pitching moment upright, and 2-5 balance 3-4 prone.
    let place = |s: &mut Scenario, id: u8, x: f64, y: f64| {
        let w = s.wires.iter_mut().find(|w| w.id == id).expect("wire");
        w.anchor = Anchor::Environment(v(x, y, WIRE_TOP));
    };
    let top_back = probe.point(&upright, &standing, &exit(3));
    let lean_34 = 0.2 * (WIRE_TOP - top_back.z);
    for id in [3u8, 4] {
        place(&mut s, id, pivot.x + lean_34, outward(corner(id).y));
    }
    let set_67 = |s: &mut Scenario, back: f64| {
        for id in [6u8, 7] {
            let p = Probe::new(&body_only).point(&upright, &standing, &shoulder(id));
            place(s, id, p.x - back, outward(p.y));
        }
    };
    let back_67 = bisect(-0.5, 1.0, |back| {
        let mut t = s.clone();
        set_67(&mut t, back);
        Probe::new(&t).pitching_moment(&upright, &standing, &[3, 4, 6, 7])
    })
    .expect("upright balance");
    set_67(&mut s, back_67);

    let lift_set = [2u8, 3, 4, 5];
    let set_25 = |s: &mut Scenario, back: f64| {
        for id in [2u8, 5] {
            let p = Probe::new(&body_only).point(&prone, &standing, &exit(id));
            place(s, id, p.x - back, outward(p.y));
        }
    };
    let back_25 = bisect(-0.5, 1.5, |back| {
        let mut t = s.clone();
        set_25(&mut t, back);
        Probe::new(&t).pitching_moment(&prone, &standing, &lift_set)
    })
    .expect("prone balance");
    set_25(&mut s, back_25);
    let rotation_set = [2u8, 3, 4, 5, 6, 7];

    let probe = Probe::new(&s);
    let delta = |id: u8, from: (&Pose, &BTreeMap<String, f64>), to: (&Pose, &BTreeMap<String, f64>)| {
        probe.length(id, to.0, to.1) - probe.length(id, from.0, from.1)
    };

    // Pretension the body wires to cancel half of the waist torque predicted
    // at the start of rotation.
    let bare = probe.waist_torque(&lifted, &folded, &rotation_set, 0.0);
    let per_newton = probe.waist_torque(&lifted, &folded, &rotation_set, 1.0) - bare;
    let pretension = (-0.5 * bare / per_newton).clamp(5.0, 120.0);

    let mut lifting = phase("Lifting", 30.0);
    lifting.compensation = lift_set.to_vec();
    for id in lift_set {
        lifting.wires.insert(id, WireTarget::Delta(delta(id, (&prone, &standing), (&lifted, &folded))));
    }
    for id in [6u8, 7] {
        lifting.wires.insert(id, WireTarget::Track);
    }
    for id in [0u8, 1] {
        lifting.wires.insert(id, WireTarget::Delta(-pretension / s.gains.kp));
    }
    lifting.joints = folded.clone();

    let mut rotation = phase("Rotation", 20.0);
    rotation.sync_barrier = true;
    rotation.compensation = rotation_set.to_vec();
    for id in rotation_set {
        let slack = if matches!(id, 2 | 5) { RELEASE } else { 0.0 };
        rotation.wires.insert(id, WireTarget::Delta(delta(id, (&lifted, &folded), (&upright, &standing)) + slack));
    }
    rotation.joints = standing.clone();

    let mut landing = phase("Landing", 15.0);
    landing.sync_barrier = true;
    landing.compensation = vec![3, 4, 6, 7];
    for id in [3u8, 4, 6, 7] {
        landing.wires.insert(id, WireTarget::Delta(delta(id, (&upright, &standing), (&landed, &standing))));
    }
    for id in [2u8, 5] {
        landing.wires.insert(id, WireTarget::Track);
    }
    landing.stop_on_contact_force = Some(0.5 * s.constants.weight());

    s.phases = vec![lifting, rotation, landing];
    s.gains.kd = RISING_KD;
    s.sim.initial_pose = InitialPose { position: prone.position, rpy: v(0.0, PRONE_PITCH, 0.0) };
    s.sim.initial_joints = standing;
    s
}

/// First root of `f` in `[lo, hi]`: scans for a sign change between finite
/// samples, then bisects.
fn bisect(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    const SAMPLES: usize = 60;
    let x = |k: usize| lo + (hi - lo) * k as f64 / SAMPLES as f64;
    let (mut a, mut b) = (0..SAMPLES).map(|k| (x(k), x(k + 1))).find(|&(a, b)| {
        let (fa, fb) = (f(a), f(b));
        fa.is_finite() && fb.is_finite() && fa * fb <= 0.0
    })?;
    let mut f_a = f(a);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        let f_mid = f(mid);
        if f_mid * f_a <= 0.0 {
            b = mid;
        } else {
            a = mid;
            f_a = f_mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Distance of the yaw wire anchors ahead of and behind the cube.
const KICK_REACH: f64 = 2.5;
/// Length wound on each yaw wire during the kick.
const KICK_WIND: f64 = 0.3;

fn kick() -> Scenario {
    let low = HANG_HEIGHT - CUBE_HALF;
    let mut wires = vec![
        environment_wire(1, v(KICK_REACH, corner(1).y, low)),
        environment_wire(2, v(-KICK_REACH, corner(2).y, low)),
    ];
    wires.extend([3, 4, 6, 7].map(splayed_wire));
    let hang = [3u8, 4, 6, 7];

    let mut pose = phase("Pose", 20.0);
    pose.compensation = hang.to_vec();
    pose.wires = BTreeMap::from([
        (1, WireTarget::Track),
        (2, WireTarget::Track),
        (3, WireTarget::Delta(-0.15)),
        (6, WireTarget::Delta(-0.15)),
        (4, WireTarget::Delta(-0.05)),
        (7, WireTarget::Delta(-0.05)),
    ]);
    pose.joints = joints(&[("hip_r", -1.2)]);

    let mut strike = phase("Kick", 10.0);
    strike.sync_barrier = true;
    strike.compensation = hang.to_vec();
    strike.wires = BTreeMap::from([(1, WireTarget::Delta(-KICK_WIND)), (2, WireTarget::Delta(-KICK_WIND))]);

    let mut s = scenario(
        "kick",
        &[
            "robot starts hanging with the feet 5 cm above the floor",
            "wires 3, 4, 6, 7 run from the top corners to a ceiling at z = 3.2 m, anchors 0.25 m outward in x and y",
            "wire 1 runs horizontally forward from the front-bottom-left corner and wire 2 backward from the back-bottom-right corner, anchors 2.5 m away; winding both turns the body right without pulling it sideways",
            "the target is a vertical plane to the right of the raised right foot",
        ],
        wires,
        vec![pose, strike],
        standing_at(v(0.0, 0.0, HANG_HEIGHT)),
    );
    s.kick_target =
        Some(KickTarget { point: v(0.6, -0.45, 0.5), normal: v(0.0, -1.0, 0.0), foot: PointRef::new("leg_r", "toe") });
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in BuiltinScenario::ALL {
            assert_eq!(b.name().parse::<BuiltinScenario>().unwrap(), b);
        }
        assert_eq!("pull-up".parse::<BuiltinScenario>().unwrap(), BuiltinScenario::PullUp);
        assert!("walk".parse::<BuiltinScenario>().is_err());
    }

    #[test]
    fn standing_body_has_centered_mass_and_human_height() {
        let s = builtin_scenario(BuiltinScenario::PullUp);
        let p = Probe::new(&s);
        let j = BTreeMap::new();
        let f = forward_kinematics(&Pose::identity(), &p.angles(&j), &p.model).unwrap();
        let c = crate::kinematics::composite_properties(&f);
        assert!(c.com_world.norm() < 1e-12, "{:?}", c.com_world);
        let crown = f.point(&PointRef::new("head", "crown")).unwrap();
        assert!((crown.z - p.lowest_contact(&Pose::identity(), &j) - 1.6).abs() < 1e-12);
    }

    #[test]
    fn four_wire_hover_is_vertical() {
        let s = hover_scenario(4);
        let p = Probe::new(&s);
        let pose = Pose::from_rpy(s.sim.initial_pose.position, 0.0, 0.0, 0.0);
        for w in &s.wires {
            assert!((p.length(w.id, &pose, &BTreeMap::new()) - (CEILING - HANG_HEIGHT - CUBE_HALF)).abs() < 1e-12);
        }
    }

    #[test]
    fn rising_starts_clear_of_the_floor() {
        let s = builtin_scenario(BuiltinScenario::Rising);
        let p = Probe::new(&s);
        let ip = &s.sim.initial_pose;
        let pose = Pose::from_rpy(ip.position, ip.rpy.x, ip.rpy.y, ip.rpy.z);
        let low = p.lowest_contact(&pose, &s.sim.initial_joints);
        assert!((low - PRONE_CLEARANCE).abs() < 1e-12);
    }
}
