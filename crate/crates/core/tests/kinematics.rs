use nalgebra::Vector3;
use proptest::prelude::*;

use cubix_sim::kinematics::{forward_kinematics, wire_geometry, wrench_matrix, BodyModel, JointAngles};
use cubix_sim::model::{Anchor, Pose, Scenario};
use cubix_sim::planner::{builtin_scenario, BuiltinScenario};

fn rising() -> Scenario {
    builtin_scenario(BuiltinScenario::Rising)
}

/// Base pose and joint angles inside the joint limits.
fn configuration(model: &BodyModel) -> impl Strategy<Value = (Pose, JointAngles)> {
    let limits: Vec<_> = model.joints().iter().map(|j| (j.limits[0] + 0.01)..(j.limits[1] - 0.01)).collect();
    ((-0.5f64..0.5, -0.5f64..0.5, 0.5f64..1.5), (-0.6f64..0.6, -1.4f64..1.4, -3.0f64..3.0), limits).prop_map(
        |((x, y, z), (r, p, w), angles)| (Pose::from_rpy(Vector3::new(x, y, z), r, p, w), JointAngles(angles)),
    )
}

fn lengths(s: &Scenario, model: &BodyModel, pose: &Pose, angles: &JointAngles) -> Vec<f64> {
    let f = forward_kinematics(pose, angles, model).unwrap();
    s.wires.iter().map(|w| wire_geometry(w, &f).unwrap().total_length).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn internal_wires_apply_no_net_wrench(
        (pose, angles) in configuration(&BodyModel::from_scenario(&rising()).unwrap()),
        tension in 0.0f64..180.0,
        about in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
    ) {
        let s = rising();
        let model = BodyModel::from_scenario(&s).unwrap();
        let frames = forward_kinematics(&pose, &angles, &model).unwrap();
        let about = Vector3::new(about.0, about.1, about.2);
        let mut internal = 0;
        for w in s.wires.iter().filter(|w| matches!(w.anchor, Anchor::Body(_))) {
            let g = wire_geometry(w, &frames).unwrap();
            prop_assert!(g.internal);
            let wrench = g.wrench(tension, &about);
            prop_assert!(wrench.force.norm() <= 1e-9 * tension.max(1.0));
            prop_assert!(wrench.moment.norm() <= 1e-9 * tension.max(1.0));
            internal += 1;
        }
        prop_assert_eq!(internal, 2);
    }

    #[test]
    fn length_gradient_is_the_force_direction(
        (pose, angles) in configuration(&BodyModel::from_scenario(&rising()).unwrap()),
        axis in 0usize..3,
    ) {
        let s = rising();
        let model = BodyModel::from_scenario(&s).unwrap();
        let frames = forward_kinematics(&pose, &angles, &model).unwrap();
        let h = 1e-6;
        let shifted = |d: f64| {
            let mut p = pose;
            p.position[axis] += d;
            lengths(&s, &model, &p, &angles)
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        for (i, w) in s.wires.iter().enumerate() {
            let g = wire_geometry(w, &frames).unwrap();
            let gradient = (plus[i] - minus[i]) / (2.0 * h);
            let force = g.wrench(1.0, &Vector3::zeros()).force[axis];
            prop_assert!((-gradient - force).abs() < 1e-5, "wire {}: {} vs {}", w.id, -gradient, force);
        }
    }

    #[test]
    fn wrench_columns_are_translation_equivariant(
        (pose, angles) in configuration(&BodyModel::from_scenario(&rising()).unwrap()),
        offset in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
    ) {
        let s = rising();
        let offset = Vector3::new(offset.0, offset.1, offset.2);
        let mut moved = s.clone();
        for w in &mut moved.wires {
            if let Anchor::Environment(a) = &mut w.anchor {
                *a += offset;
            }
        }
        let model = BodyModel::from_scenario(&s).unwrap();
        let mut moved_pose = pose;
        moved_pose.position += offset;
        let f0 = forward_kinematics(&pose, &angles, &model).unwrap();
        let f1 = forward_kinematics(&moved_pose, &angles, &model).unwrap();
        let external = |s: &Scenario, f| -> Vec<_> {
            s.wires
                .iter()
                .filter(|w| matches!(w.anchor, Anchor::Environment(_)))
                .map(|w| wire_geometry(w, f).unwrap())
                .collect()
        };
        let (g0, g1) = (external(&s, &f0), external(&moved, &f1));
        let com = Vector3::new(0.1, -0.2, 0.9);
        let m0 = wrench_matrix(&g0.iter().collect::<Vec<_>>(), &com).unwrap();
        let m1 = wrench_matrix(&g1.iter().collect::<Vec<_>>(), &(com + offset)).unwrap();
        prop_assert!((m0 - m1).amax() < 1e-9);
    }
}
