use std::collections::BTreeMap;

use nalgebra::{Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};

use super::KinematicsError;
use crate::model::{PointRef, Pose, Scenario};

/// Slack allowed when checking interpolated joint angles against limits.
const LIMIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SegmentModel {
    pub name: String,
    pub mass: f64,
    pub com: Vector3<f64>,
    pub inertia: Matrix3<f64>,
    pub points: BTreeMap<String, Vector3<f64>>,
    pub contact_points: BTreeMap<String, Vector3<f64>>,
    /// Index into [`BodyModel::joints`] of the joint this segment hangs from.
    pub parent_joint: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct JointModel {
    pub name: String,
    pub parent: usize,
    pub child: usize,
    pub origin: Vector3<f64>,
    pub axis: Unit<Vector3<f64>>,
    pub limits: [f64; 2],
}

/// Floating base plus a tree of prescribed revolute joints.
///
/// Segments are stored parents-first with the root (the base) at index 0.
/// Masses and inertias are rescaled so the segments sum to the scenario's
/// total mass.
#[derive(Debug, Clone)]
pub struct BodyModel {
    segments: Vec<SegmentModel>,
    joints: Vec<JointModel>,
    segment_index: BTreeMap<String, usize>,
    joint_index: BTreeMap<String, usize>,
}

/// Joint angles in the order of [`BodyModel::joints`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointAngles(pub Vec<f64>);

impl JointAngles {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl BodyModel {
    /// Builds the model from a validated scenario.
    pub fn from_scenario(s: &Scenario) -> Result<Self, KinematicsError> {
        let raw_mass: f64 = s.segments.iter().map(|seg| seg.mass).sum();
        let scale = s.constants.total_mass / raw_mass;

        let child_joint: BTreeMap<&str, usize> =
            s.joints.iter().enumerate().map(|(i, j)| (j.child.as_str(), i)).collect();
        let root = s
            .segments
            .iter()
            .find(|seg| !child_joint.contains_key(seg.name.as_str()))
            .ok_or_else(|| KinematicsError::InvalidTree("no root segment".into()))?;

        // Breadth-first from the root so parents precede children.
        let mut order = vec![root.name.clone()];
        let mut i = 0;
        while i < order.len() {
            let parent = order[i].clone();
            for j in s.joints.iter().filter(|j| j.parent == parent) {
                order.push(j.child.clone());
            }
            i += 1;
            if order.len() > s.segments.len() {
                return Err(KinematicsError::InvalidTree("cycle in joint tree".into()));
            }
        }
        if order.len() != s.segments.len() {
            return Err(KinematicsError::InvalidTree("segments unreachable from the root".into()));
        }
        let segment_index: BTreeMap<String, usize> = order.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let joints: Vec<JointModel> = s
            .joints
            .iter()
            .map(|j| JointModel {
                name: j.name.clone(),
                parent: segment_index[&j.parent],
                child: segment_index[&j.child],
                origin: j.origin,
                axis: Unit::new_normalize(j.axis),
                limits: j.limits,
            })
            .collect();
        let joint_index = joints.iter().enumerate().map(|(i, j)| (j.name.clone(), i)).collect();

        let segments = order
            .iter()
            .map(|name| {
                let seg = s.segment(name).expect("segment listed in order");
                SegmentModel {
                    name: name.clone(),
                    mass: seg.mass * scale,
                    com: seg.com,
                    inertia: seg.inertia_matrix() * scale,
                    points: seg.points.clone(),
                    contact_points: seg.contact_points.clone(),
                    parent_joint: child_joint.get(name.as_str()).copied(),
                }
            })
            .collect();

        Ok(Self { segments, joints, segment_index, joint_index })
    }

    pub fn segments(&self) -> &[SegmentModel] {
        &self.segments
    }

    pub fn joints(&self) -> &[JointModel] {
        &self.joints
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.segment_index.get(name).copied()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_index.get(name).copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mass).sum()
    }

    /// Angles from a name map; joints not named sit at zero.
    pub fn angles_from_map(&self, map: &BTreeMap<String, f64>) -> Result<JointAngles, KinematicsError> {
        let mut angles = vec![0.0; self.joints.len()];
        for (name, &v) in map {
            let i = self.joint_index(name).ok_or_else(|| KinematicsError::UnknownJoint(name.clone()))?;
            angles[i] = v;
        }
        Ok(JointAngles(angles))
    }

    pub fn angles_to_map(&self, angles: &JointAngles) -> BTreeMap<String, f64> {
        self.joints.iter().zip(&angles.0).map(|(j, &a)| (j.name.clone(), a)).collect()
    }

    /// True when `descendant` is `ancestor` or lies below it in the tree.
    pub fn is_in_subtree(&self, descendant: usize, ancestor: usize) -> bool {
        let mut cur = descendant;
        loop {
            if cur == ancestor {
                return true;
            }
            match self.segments[cur].parent_joint {
                Some(j) => cur = self.joints[j].parent,
                None => return false,
            }
        }
    }

    pub fn resolve(&self, p: &PointRef) -> Result<(usize, Vector3<f64>), KinematicsError> {
        let seg = self.segment_index(&p.segment).ok_or_else(|| KinematicsError::UnknownPoint(p.clone()))?;
        let s = &self.segments[seg];
        let local = s
            .points
            .get(&p.point)
            .or_else(|| s.contact_points.get(&p.point))
            .ok_or_else(|| KinematicsError::UnknownPoint(p.clone()))?;
        Ok((seg, *local))
    }
}

/// World placement of every segment for one base pose and set of joint angles.
#[derive(Debug, Clone)]
pub struct BodyFrames<'m> {
    model: &'m BodyModel,
    frames: Vec<Isometry3<f64>>,
}

impl<'m> BodyFrames<'m> {
    pub fn model(&self) -> &'m BodyModel {
        self.model
    }

    pub fn frame(&self, segment: usize) -> &Isometry3<f64> {
        &self.frames[segment]
    }

    pub fn world_point(&self, segment: usize, local: &Vector3<f64>) -> Vector3<f64> {
        self.frames[segment].transform_point(&(*local).into()).coords
    }

    pub fn point(&self, p: &PointRef) -> Result<Vector3<f64>, KinematicsError> {
        let (seg, local) = self.model.resolve(p)?;
        Ok(self.world_point(seg, &local))
    }

    /// World position of every named point, attachment and contact alike.
    pub fn points(&self) -> BTreeMap<PointRef, Vector3<f64>> {
        let mut out = BTreeMap::new();
        for (i, seg) in self.model.segments.iter().enumerate() {
            for (name, local) in seg.points.iter().chain(&seg.contact_points) {
                out.insert(PointRef::new(seg.name.clone(), name.clone()), self.world_point(i, local));
            }
        }
        out
    }

    /// `(segment index, point name, world position)` for every contact point.
    pub fn contact_points(&self) -> impl Iterator<Item = (usize, &'m str, Vector3<f64>)> + '_ {
        self.model.segments.iter().enumerate().flat_map(move |(i, seg)| {
            seg.contact_points.iter().map(move |(n, local)| (i, n.as_str(), self.world_point(i, local)))
        })
    }

    /// World axis and origin of a joint.
    pub fn joint_axis(&self, joint: usize) -> (Vector3<f64>, Vector3<f64>) {
        let j = &self.model.joints[joint];
        let parent = &self.frames[j.parent];
        (parent.transform_point(&j.origin.into()).coords, parent.rotation * j.axis.into_inner())
    }
}

/// Places every segment of the body in the world.
pub fn forward_kinematics<'m>(
    base: &Pose,
    angles: &JointAngles,
    model: &'m BodyModel,
) -> Result<BodyFrames<'m>, KinematicsError> {
    if angles.0.len() != model.joints.len() {
        return Err(KinematicsError::AngleCount { expected: model.joints.len(), got: angles.0.len() });
    }
    let mut frames = vec![Isometry3::identity(); model.segments.len()];
    frames[0] = Isometry3::from_parts(Translation3::from(base.position), base.orientation);
    for i in 1..model.segments.len() {
        let j = &model.joints[model.segments[i].parent_joint.expect("non-root has a joint")];
        let angle = angles.0[model.segments[i].parent_joint.unwrap()];
        if !(angle >= j.limits[0] - LIMIT_SLACK && angle <= j.limits[1] + LIMIT_SLACK) {
            return Err(KinematicsError::AngleOutOfLimits { joint: j.name.clone(), angle });
        }
        let local =
            Isometry3::from_parts(Translation3::from(j.origin), UnitQuaternion::from_axis_angle(&j.axis, angle));
        frames[i] = frames[j.parent] * local;
    }
    Ok(BodyFrames { model, frames })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeProperties {
    pub total_mass: f64,
    pub com_world: Vector3<f64>,
    pub inertia_about_com_world: Matrix3<f64>,
}

/// Mass-weighted COM and parallel-axis inertia of the whole body.
pub fn composite_properties(frames: &BodyFrames<'_>) -> CompositeProperties {
    let model = frames.model;
    let total_mass = model.total_mass();
    let mut com = Vector3::zeros();
    for (i, seg) in model.segments.iter().enumerate() {
        com += seg.mass * frames.world_point(i, &seg.com);
    }
    if total_mass > 0.0 {
        com /= total_mass;
    }
    let mut inertia = Matrix3::zeros();
    for (i, seg) in model.segments.iter().enumerate() {
        let r = frames.frames[i].rotation.to_rotation_matrix();
        let d = frames.world_point(i, &seg.com) - com;
        inertia += r.matrix() * seg.inertia * r.matrix().transpose()
            + seg.mass * (Matrix3::identity() * d.norm_squared() - d * d.transpose());
    }
    CompositeProperties { total_mass, com_world: com, inertia_about_com_world: inertia }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BodySegment, RevoluteJoint};
    use std::f64::consts::FRAC_PI_2;

    fn seg(name: &str, mass: f64, com: [f64; 3]) -> BodySegment {
        BodySegment {
            name: name.into(),
            mass,
            com: com.into(),
            inertia: [[0.0; 3]; 3],
            points: BTreeMap::new(),
            contact_points: BTreeMap::new(),
        }
    }

    fn two_segment_scenario() -> Scenario {
        let mut base = seg("base", 1.0, [0.0, 0.0, 0.0]);
        base.points.insert("p".into(), Vector3::new(0.1, 0.0, 0.0));
        let mut torso = seg("torso", 1.0, [0.0, 0.0, 0.3]);
        torso.points.insert("top".into(), Vector3::new(0.0, 0.0, 0.3));
        let mut s = crate::testutil::skeleton(vec![base, torso]);
        s.constants.total_mass = 2.0;
        s.joints.push(RevoluteJoint {
            name: "waist".into(),
            parent: "base".into(),
            child: "torso".into(),
            origin: Vector3::zeros(),
            axis: Vector3::y(),
            limits: [-2.0, 2.0],
            torque_limit: None,
        });
        s
    }

    #[test]
    fn base_points_follow_the_pose() {
        let s = two_segment_scenario();
        let m = BodyModel::from_scenario(&s).unwrap();
        let zero = JointAngles(vec![0.0]);
        let f = forward_kinematics(&Pose::identity(), &zero, &m).unwrap();
        assert_eq!(f.point(&PointRef::new("base", "p")).unwrap(), Vector3::new(0.1, 0.0, 0.0));
        let lifted = Pose::new(Vector3::new(0.0, 0.0, 1.0), UnitQuaternion::identity());
        let f = forward_kinematics(&lifted, &zero, &m).unwrap();
        assert_eq!(f.point(&PointRef::new("base", "p")).unwrap(), Vector3::new(0.1, 0.0, 1.0));
    }

    #[test]
    fn quarter_turn_of_the_waist() {
        let s = two_segment_scenario();
        let m = BodyModel::from_scenario(&s).unwrap();
        let f = forward_kinematics(&Pose::identity(), &JointAngles(vec![FRAC_PI_2]), &m).unwrap();
        let top = f.point(&PointRef::new("torso", "top")).unwrap();
        assert!((top - Vector3::new(0.3, 0.0, 0.0)).norm() < 1e-12, "{top}");
    }

    #[test]
    fn limits_are_enforced() {
        let s = two_segment_scenario();
        let m = BodyModel::from_scenario(&s).unwrap();
        let err = forward_kinematics(&Pose::identity(), &JointAngles(vec![2.5]), &m).unwrap_err();
        assert!(matches!(err, KinematicsError::AngleOutOfLimits { .. }));
    }

    #[test]
    fn two_point_masses_parallel_axis() {
        let mut s = crate::testutil::skeleton(vec![seg("a", 1.0, [1.0, 0.0, 0.0]), seg("b", 1.0, [-1.0, 0.0, 0.0])]);
        s.constants.total_mass = 2.0;
        s.joints.push(RevoluteJoint {
            name: "j".into(),
            parent: "a".into(),
            child: "b".into(),
            origin: Vector3::zeros(),
            axis: Vector3::z(),
            limits: [-1.0, 1.0],
            torque_limit: None,
        });
        let m = BodyModel::from_scenario(&s).unwrap();
        let f = forward_kinematics(&Pose::identity(), &JointAngles(vec![0.0]), &m).unwrap();
        let c = composite_properties(&f);
        assert!(c.com_world.norm() < 1e-15);
        assert!((c.inertia_about_com_world[(1, 1)] - 2.0).abs() < 1e-12);
        assert!((c.inertia_about_com_world[(2, 2)] - 2.0).abs() < 1e-12);
        assert!(c.inertia_about_com_world[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn single_segment_is_transformed() {
        let mut only = seg("base", 3.0, [0.1, 0.2, 0.3]);
        only.inertia = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
        let mut s = crate::testutil::skeleton(vec![only]);
        s.constants.total_mass = 3.0;
        let m = BodyModel::from_scenario(&s).unwrap();
        let pose = Pose::from_rpy(Vector3::new(1.0, 2.0, 3.0), 0.0, 0.0, FRAC_PI_2);
        let c = composite_properties(&forward_kinematics(&pose, &JointAngles(vec![]), &m).unwrap());
        assert_eq!(c.total_mass, 3.0);
        assert!((c.com_world - Vector3::new(0.8, 2.1, 3.3)).norm() < 1e-12);
        let expected = Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 3.0));
        assert!((c.inertia_about_com_world - expected).norm() < 1e-12);
    }

    #[test]
    fn masses_rescale_to_total() {
        let s = crate::testutil::skeleton(vec![seg("a", 2.0, [0.0; 3]), seg("b", 6.0, [0.0; 3])]);
        let mut s = s;
        s.joints.push(RevoluteJoint {
            name: "j".into(),
            parent: "a".into(),
            child: "b".into(),
            origin: Vector3::zeros(),
            axis: Vector3::z(),
            limits: [-1.0, 1.0],
            torque_limit: None,
        });
        let m = BodyModel::from_scenario(&s).unwrap();
        assert!((m.total_mass() - 44.6).abs() <= 1e-12 * 44.6);
        assert!((m.segments()[1].mass - 0.75 * 44.6).abs() < 1e-12);
    }
}
