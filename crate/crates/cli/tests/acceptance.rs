//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubix_sim::control::{gravity_feedforward, joint_torque_budget, ControlError, DistributionError};
use cubix_sim::dynamics::{Dynamics, SimState};
use cubix_sim::engine::{self, read_csv, Event, Simulation, TrajectoryLog};
use cubix_sim::model::{Anchor, Scenario};
use cubix_sim::planner::{builtin_scenario, hover_scenario, BuiltinScenario};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cubix() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubix"))
}

fn run_builtins(names: &[&str], out: &Path) {
    let mut cmd = cubix();
    cmd.arg("run").arg("-o").arg(out).args(["--jobs", "3"]);
    for n in names {
        cmd.args(["--builtin", n]);
    }
    let status = cmd.output().expect("cubix runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn max_rate(log: &TrajectoryLog) -> f64 {
    log.diagnostics.iter().flat_map(|d| d.wire_rates.iter().flatten()).fold(0.0, |m: f64, r| m.max(r.abs()))
}

fn f_ref_range(log: &TrajectoryLog) -> (f64, f64) {
    log.rows
        .iter()
        .flat_map(|r| r.f_ref.iter().flatten())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)))
}

fn pull_up() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    run_builtins(&["pull_up"], dir.path());
    let wall = started.elapsed().as_secs_f64();
    let rows = read_csv(std::fs::File::open(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    let rise = rows.last().unwrap().position[2] - rows[0].position[2];

    let s = builtin_scenario(BuiltinScenario::PullUp);
    let log = engine::run(&s).unwrap();
    let (lo, hi) = f_ref_range(&log);
    let rate = max_rate(&log);
    check(
        (rise - 0.53).abs() <= 0.05 && lo >= 0.0 && hi <= 180.0 && rate <= s.constants.wind_rate_max && wall < 10.0,
        format!("rise {rise:.4} m, f_ref [{lo:.2}, {hi:.2}] N, max |rate| {rate:.4} m/s, wall {wall:.2} s"),
    )
}

fn hover_feedforward(n: usize) -> Result<Vec<f64>, ControlError> {
    let s = hover_scenario(n);
    let d = Dynamics::new(&s).unwrap();
    let st = d.initial_state().unwrap();
    let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
    let active: Vec<_> = snap.geometries.iter().collect();
    gravity_feedforward(&active, d.f_max(), &snap.composite.com_world, s.constants.weight()).map(|f| f.tensions)
}

fn weight_share() -> Outcome {
    let four = hover_feedforward(4).unwrap();
    let three = hover_feedforward(3).unwrap();
    let one = engine::run(&hover_scenario(1));
    let one_code = one.as_ref().err().map(|e| e.code());
    check(
        four.iter().all(|t| (t - 109.37).abs() <= 0.1)
            && three.iter().all(|t| (t - 145.8).abs() <= 0.1)
            && one_code == Some("Infeasible"),
        format!("4 wires {four:.3?} N, 3 wires {three:.3?} N, 1 wire {one_code:?}"),
    )
}

fn span<'a>(log: &'a TrajectoryLog, name: &str) -> &'a [engine::LogRow] {
    let (_, a, b) = log.phase_spans().into_iter().find(|(n, _, _)| n == name).expect("phase present");
    &log.rows[a..=b]
}

fn waist_with_and_without_internal(s: &Scenario) -> (f64, f64) {
    let mut sim = Simulation::new(s).unwrap();
    let rec = loop {
        let rec = sim.tick().unwrap();
        if rec.planner.phase_name == "Rotation" {
            break rec;
        }
    };
    let d = sim.dynamics();
    let snap = d.snapshot(&rec.state.base_pose, &rec.state.joint_angles).unwrap();
    let g = s.constants.gravity;
    let with = joint_torque_budget("waist", &snap.frames, &snap.geometries, &rec.command.f_ref, g).unwrap();
    let mut off = rec.command.f_ref.clone();
    for (t, w) in off.iter_mut().zip(&s.wires) {
        if matches!(w.anchor, Anchor::Body(_)) {
            *t = 0.0;
        }
    }
    let without = joint_torque_budget("waist", &snap.frames, &snap.geometries, &off, g).unwrap();
    (with.required, without.required)
}

fn rising() -> Outcome {
    let s = builtin_scenario(BuiltinScenario::Rising);
    let log = engine::run(&s).unwrap();
    let order: Vec<String> = log.phase_spans().into_iter().map(|(n, _, _)| n).collect();
    let lifting = span(&log, "Lifting");
    let rotation = span(&log, "Rotation");
    let landing = span(&log, "Landing");
    let z0 = lifting[0].position[2];
    let z1 = lifting.last().unwrap().position[2];
    let pitch_start = rotation[0].rpy[1];
    let pitch_rot_end = rotation.last().unwrap().rpy[1];
    let pitch_final = log.rows.last().unwrap().rpy[1];
    let touchdowns = landing.iter().flat_map(|r| &r.events).filter(|e| matches!(e, Event::TouchDown { .. })).count();
    let (with, without) = waist_with_and_without_internal(&s);
    check(
        order == ["Lifting", "Rotation", "Landing"]
            && z1 > z0
            && (pitch_start - FRAC_PI_2).abs() < 0.15
            && pitch_rot_end.abs() < pitch_start.abs()
            && pitch_final.abs() < 0.1
            && touchdowns >= 2
            && with.abs() < without.abs(),
        format!(
            "phases {order:?}, lifting z {z0:.3}->{z1:.3} m, pitch {pitch_start:.3}->{pitch_rot_end:.3} \
             (final {pitch_final:.4}) rad, {touchdowns} touchdowns in Landing, waist {with:.2} vs {without:.2} N·m"
        ),
    )
}

fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

fn kick() -> Outcome {
    let s = builtin_scenario(BuiltinScenario::Kick);
    let log = engine::run(&s).unwrap();
    let spans = log.phase_spans();
    let first = &log.rows[spans[0].1..=spans[0].2];
    let second = &log.rows[spans[1].1..=spans[1].2];
    let roll0 = first[0].rpy[0];
    let roll1 = first.last().unwrap().rpy[0];
    let target = s.kick_target.as_ref().unwrap().point;
    let off_bearing = |r: &engine::LogRow| {
        let bearing = (target.y - r.position[1]).atan2(target.x - r.position[0]);
        angle_between(r.rpy[2], bearing)
    };
    let (yaw0, yaw1) = (second[0].rpy[2], second.last().unwrap().rpy[2]);
    let (off0, off1) = (off_bearing(&second[0]), off_bearing(second.last().unwrap()));
    let contacts: Vec<String> =
        log.events().filter(|(_, e)| matches!(e, Event::KickContact { .. })).map(|(_, e)| e.to_string()).collect();
    check(
        roll1.abs() > roll0.abs() && off1 < off0 && contacts.len() == 1,
        format!(
            "roll {roll0:.3}->{roll1:.3} rad, yaw {yaw0:.3}->{yaw1:.3} rad (off target {off0:.3}->{off1:.3}), \
             kick contacts {contacts:?}"
        ),
    )
}

/// Minimum-norm box-constrained solution by enumerating every assignment of
/// each wire to its lower bound, upper bound, or the free set.
fn enumerate_active_sets(cols: &[Vector3<f64>], upper: &[f64], b: &Vector3<f64>) -> Option<Vec<f64>> {
    let k = cols.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(k as u32) {
        let state: Vec<usize> = (0..k).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let mut f: Vec<f64> = (0..k).map(|i| if state[i] == 1 { upper[i] } else { 0.0 }).collect();
        let free: Vec<usize> = (0..k).filter(|&i| state[i] == 2).collect();
        if !free.is_empty() {
            let fixed: Vector3<f64> = (0..k).map(|i| cols[i] * f[i]).sum();
            let r = b - fixed;
            let a = DMatrix::from_fn(3, free.len(), |row, c| cols[free[c]][row]);
            let x = a.pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(r.as_slice());
            for (j, &i) in free.iter().enumerate() {
                f[i] = x[j];
            }
        }
        let produced: Vector3<f64> = (0..k).map(|i| cols[i] * f[i]).sum();
        if (produced - b).norm() > 1e-7 || (0..k).any(|i| f[i] < -1e-9 || f[i] > upper[i] + 1e-9) {
            continue;
        }
        let cost: f64 = f.iter().map(|x| x * x).sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, f));
        }
    }
    best.map(|(_, f)| f)
}

fn direction(azimuth: f64, z: f64) -> Vector3<f64> {
    let h = (1.0 - z * z).sqrt();
    Vector3::new(h * azimuth.cos(), h * azimuth.sin(), z)
}

fn distribution_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut feasible, mut infeasible) = (0usize, 0usize);
    let mut worst_tension = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut failures = Vec::new();
    for problem in 0..500 {
        let k = if rng.random_bool(0.7) { rng.random_range(3..=4usize) } else { rng.random_range(1..=2usize) };
        let spread = rng.random_bool(0.5);
        let start = rng.random_range(0.0..std::f64::consts::TAU);
        let mut dirs: Vec<Vector3<f64>> = (0..k)
            .map(|i| {
                let azimuth = if spread {
                    start + std::f64::consts::TAU * i as f64 / k as f64 + rng.random_range(-0.6..0.6)
                } else {
                    rng.random_range(0.0..std::f64::consts::TAU)
                };
                direction(azimuth, rng.random_range(0.2..1.0))
            })
            .collect();
        if k == 1 && rng.random_bool(0.5) {
            dirs[0] = Vector3::z();
        }
        if k == 2 && rng.random_bool(0.6) {
            dirs[1] = Vector3::new(-dirs[0].x, -dirs[0].y, dirs[0].z);
        }
        let upper: Vec<f64> = (0..k).map(|_| rng.random_range(60.0..=180.0)).collect();
        let weight = rng.random_range(20.0..400.0);

        let mut s = hover_scenario(4);
        s.wires.truncate(k);
        let base = builtin_origin(&s);
        for (i, w) in s.wires.iter_mut().enumerate() {
            let exit = base + s.segments[0].points[&w.exit.point];
            w.anchor = Anchor::Environment(exit + dirs[i] * 2.0);
            w.f_max = Some(upper[i]);
        }
        let d = Dynamics::new(&s).unwrap();
        let st = d.initial_state().unwrap();
        let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
        let active: Vec<_> = snap.geometries.iter().collect();
        let got = gravity_feedforward(&active, d.f_max(), &snap.composite.com_world, weight);
        let target = Vector3::new(0.0, 0.0, weight);
        let expected = enumerate_active_sets(&dirs, &upper, &target);
        match (got, expected) {
            (Ok(ff), Some(f)) => {
                feasible += 1;
                let diff = ff.tensions.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let produced: Vector3<f64> = dirs.iter().zip(&ff.tensions).map(|(d, t)| d * *t).sum();
                let residual = (produced - target).norm();
                worst_tension = worst_tension.max(diff);
                worst_residual = worst_residual.max(residual);
                if diff > 1e-6 || residual >= 1e-6 {
                    failures.push(format!("#{problem}: diff {diff:e}, residual {residual:e}"));
                }
            }
            (Err(ControlError::Infeasible(DistributionError::Infeasible)), None) => infeasible += 1,
            (got, expected) => failures.push(format!("#{problem}: solver {got:?}, enumeration {expected:?}")),
        }
    }
    check(
        failures.is_empty() && feasible > 0 && infeasible > 0,
        format!(
            "{feasible} feasible and {infeasible} infeasible agree, max tension diff {worst_tension:.2e} N, \
             max residual {worst_residual:.2e} N{}",
            if failures.is_empty() { String::new() } else { format!("; mismatches {failures:?}") }
        ),
    )
}

fn builtin_origin(s: &Scenario) -> Vector3<f64> {
    assert_eq!(s.sim.initial_pose.rpy, Vector3::zeros());
    s.sim.initial_pose.position
}

fn airborne(which: BuiltinScenario) -> Scenario {
    let mut s = builtin_scenario(which);
    s.wires.clear();
    s.contact.enabled = false;
    s.sim.initial_pose.position.z = 5.0;
    s
}

fn coast(d: &Dynamics<'_>, mut st: SimState, tensions: &[f64], dt: f64, steps: usize) -> SimState {
    for _ in 0..steps {
        let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
        let w = d.assemble_wrench(&st, &snap, tensions).unwrap();
        let angles = st.joint_angles.clone();
        st = d.step(&st, &snap, &w.wrench, tensions, &angles, dt).unwrap();
    }
    st
}

fn free_fall_error(dt: f64) -> f64 {
    let s = airborne(BuiltinScenario::PullUp);
    let d = Dynamics::new(&s).unwrap();
    let st = d.initial_state().unwrap();
    let z0 = st.base_pose.position.z;
    let end = coast(&d, st, &[], dt, (0.1 / dt).round() as usize);
    let exact = 0.5 * s.constants.gravity * 0.01;
    ((z0 - end.base_pose.position.z) - exact).abs() / exact
}

fn angular_momentum_drift() -> f64 {
    let s = airborne(BuiltinScenario::Rising);
    let d = Dynamics::new(&s).unwrap();
    let mut st = d.initial_state().unwrap();
    st.base_twist.angular_velocity = Vector3::new(0.3, -0.5, 0.8);
    let l0 = d.angular_momentum(&st, &d.snapshot(&st.base_pose, &st.joint_angles).unwrap());
    let end = coast(&d, st, &[], 1e-3, 1000);
    let l1 = d.angular_momentum(&end, &d.snapshot(&end.base_pose, &end.joint_angles).unwrap());
    (l1 - l0).norm() / l0.norm()
}

/// Relative mismatch between the mechanical energy gained and the work the
/// wires did while shortening, over one second under constant tensions.
fn power_balance() -> (f64, f64, f64) {
    let mut s = builtin_scenario(BuiltinScenario::PullUp);
    s.contact.enabled = false;
    let d = Dynamics::new(&s).unwrap();
    let mut st = d.initial_state().unwrap();
    let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
    let env: Vec<usize> = (0..s.wires.len()).filter(|&i| !snap.geometries[i].internal).collect();
    let active: Vec<_> = env.iter().map(|&i| &snap.geometries[i]).collect();
    let limits: Vec<f64> = env.iter().map(|&i| d.f_max()[i]).collect();
    let ff = gravity_feedforward(&active, &limits, &snap.composite.com_world, s.constants.weight()).unwrap();
    let mut tensions = vec![0.0; s.wires.len()];
    for (&i, t) in env.iter().zip(&ff.tensions) {
        tensions[i] = (t * 1.1).min(d.f_max()[i]);
    }

    let dt = 1e-3;
    let e0 = d.mechanical_energy(&st, &snap);
    let mut work = 0.0;
    for _ in 0..1000 {
        let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
        let w = d.assemble_wrench(&st, &snap, &tensions).unwrap();
        let angles = st.joint_angles.clone();
        let next = d.step(&st, &snap, &w.wrench, &tensions, &angles, dt).unwrap();
        work += tensions
            .iter()
            .zip(st.wire_lengths.iter().zip(&next.wire_lengths))
            .map(|(t, (a, b))| t * (a - b))
            .sum::<f64>();
        st = next;
    }
    let e1 = d.mechanical_energy(&st, &d.snapshot(&st.base_pose, &st.joint_angles).unwrap());
    let gained = e1 - e0;
    ((gained - work).abs() / work.abs(), gained, work)
}

fn dynamics_sanity() -> Outcome {
    let coarse = free_fall_error(1e-3);
    let fine = free_fall_error(5e-4);
    let ratio = fine / coarse;
    let drift = angular_momentum_drift();
    let (mismatch, gained, work) = power_balance();
    check(
        coarse <= 0.01 * (1.0 + 1e-9) && ratio <= 0.5 + 1e-6 && drift < 0.005 && mismatch < 0.01,
        format!(
            "free fall error {:.4}% at 1 ms, {:.4}% at 0.5 ms (ratio {ratio:.6}), angular momentum drift \
             {:.2e} /s, energy gained {gained:.3} J vs wire work {work:.3} J ({:.4}%)",
            coarse * 100.0,
            fine * 100.0,
            drift,
            mismatch * 100.0
        ),
    )
}

fn internal_wire_neutrality() -> Outcome {
    let s = builtin_scenario(BuiltinScenario::Rising);
    let d = Dynamics::new(&s).unwrap();
    let st = d.initial_state().unwrap();
    let snap = d.snapshot(&st.base_pose, &st.joint_angles).unwrap();
    let g = s.constants.gravity;
    let baseline: Vec<f64> = snap.geometries.iter().map(|geo| if geo.internal { 0.0 } else { 60.0 }).collect();
    let w0 = d.assemble_wrench(&st, &snap, &baseline).unwrap().wrench;
    let b0 = joint_torque_budget("waist", &snap.frames, &snap.geometries, &baseline, g).unwrap();

    let internal: Vec<usize> = (0..s.wires.len()).filter(|&i| snap.geometries[i].internal).collect();
    let (mut worst_wrench, mut least_torque) = (0.0f64, f64::INFINITY);
    for &i in &internal {
        for tension in [1.0, 45.0, 120.0, 180.0] {
            let mut t = baseline.clone();
            t[i] = tension;
            let w = d.assemble_wrench(&st, &snap, &t).unwrap().wrench;
            let b = joint_torque_budget("waist", &snap.frames, &snap.geometries, &t, g).unwrap();
            worst_wrench = worst_wrench.max((w.force - w0.force).amax()).max((w.moment - w0.moment).amax());
            least_torque = least_torque.min((b.required - b0.required).abs());
        }
    }
    check(
        !internal.is_empty() && worst_wrench < 1e-9 && least_torque > 0.0,
        format!(
            "{} body wires, max net wrench change {worst_wrench:.2e}, min waist torque change {least_torque:.3} N·m",
            internal.len()
        ),
    )
}

fn determinism() -> Outcome {
    let names = ["pull_up", "rising", "kick"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_builtins(&names, a.path());
    run_builtins(&names, b.path());
    let mut details = Vec::new();
    let mut ok = true;
    for n in names {
        let x = std::fs::read(a.path().join(n).join("trajectory.csv")).unwrap();
        let y = std::fs::read(b.path().join(n).join("trajectory.csv")).unwrap();
        ok &= !x.is_empty() && x == y;
        details.push(format!("{n} {} bytes {}", x.len(), if x == y { "identical" } else { "differ" }));
    }
    check(ok, details.join(", "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("pull-up reproduction", pull_up),
        ("weight share", weight_share),
        ("rising reproduction", rising),
        ("kick reproduction", kick),
        ("tension distribution oracle", distribution_oracle),
        ("dynamics sanity", dynamics_sanity),
        ("internal-wire neutrality", internal_wire_neutrality),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut out = String::new();
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed.push(name);
        }
        out.push_str(&format!("{tag} [{}] {name}: {detail}\n", i + 1));
    }
    std::io::stdout().write_all(out.as_bytes()).unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}
