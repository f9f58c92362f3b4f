use nalgebra::{Dyn, OMatrix, Vector3, Vector6, U6};

use super::{BodyFrames, KinematicsError};
use crate::model::{Anchor, Wire};

/// Minimum separation between consecutive routing points.
pub const MIN_SEPARATION: f64 = 1e-9;

/// One straight run of a wire between routing points.
#[derive(Debug, Clone, PartialEq)]
pub struct WireSpan {
    pub from: Vector3<f64>,
    pub to: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub length: f64,
}

/// Where a unit tension acts on the body: force `direction` at `point`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceApplication {
    pub point: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireGeometry {
    pub wire_id: u8,
    pub internal: bool,
    pub total_length: f64,
    pub spans: Vec<WireSpan>,
    pub force_application: Vec<ForceApplication>,
}

/// Net force and moment (about a reference point) on the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self { force: Vector3::zeros(), moment: Vector3::zeros() }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.force.x, self.force.y, self.force.z, self.moment.x, self.moment.y, self.moment.z)
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench { force: self.force + rhs.force, moment: self.moment + rhs.moment }
    }
}

impl std::ops::AddAssign for Wrench {
    fn add_assign(&mut self, rhs: Wrench) {
        self.force += rhs.force;
        self.moment += rhs.moment;
    }
}

impl WireGeometry {
    /// Wrench of this wire at `tension`, moments taken about `about`.
    pub fn wrench(&self, tension: f64, about: &Vector3<f64>) -> Wrench {
        let mut w = Wrench::zero();
        for fa in &self.force_application {
            let f = fa.direction * tension;
            w.force += f;
            w.moment += (fa.point - about).cross(&f);
        }
        w
    }
}

/// Routes a wire through its via-points and computes where its tension acts.
///
/// Via-points are frictionless and of zero radius: the tension is uniform
/// along the wire and a via-point receives the sum of the unit vectors along
/// both adjacent spans.
pub fn wire_geometry(wire: &Wire, frames: &BodyFrames<'_>) -> Result<WireGeometry, KinematicsError> {
    let model = frames.model();
    // (world point, owning segment or None for the environment)
    let mut route: Vec<(Vector3<f64>, Option<usize>)> = Vec::with_capacity(wire.via.len() + 2);
    for p in std::iter::once(&wire.exit).chain(&wire.via) {
        let (seg, local) = model.resolve(p)?;
        route.push((frames.world_point(seg, &local), Some(seg)));
    }
    match &wire.anchor {
        Anchor::Environment(p) => route.push((*p, None)),
        Anchor::Body(p) => {
            let (seg, local) = model.resolve(p)?;
            route.push((frames.world_point(seg, &local), Some(seg)));
        }
    }

    let mut spans = Vec::with_capacity(route.len() - 1);
    for pair in route.windows(2) {
        let delta = pair[1].0 - pair[0].0;
        let length = delta.norm();
        if !(length > MIN_SEPARATION) {
            return Err(KinematicsError::CoincidentPoints { wire: wire.id });
        }
        spans.push(WireSpan { from: pair[0].0, to: pair[1].0, direction: delta / length, length });
    }

    let last = route.len() - 1;
    let mut force_application = Vec::with_capacity(route.len());
    for (k, (point, seg)) in route.iter().enumerate() {
        let Some(seg) = *seg else { continue };
        let mut direction = Vector3::zeros();
        if k < last {
            direction += spans[k].direction;
        }
        if k > 0 {
            direction -= spans[k - 1].direction;
        }
        force_application.push(ForceApplication { point: *point, direction, segment: seg });
    }

    Ok(WireGeometry {
        wire_id: wire.id,
        internal: wire.is_internal(),
        total_length: spans.iter().map(|s| s.length).sum(),
        spans,
        force_application,
    })
}

/// Cable wrench matrix: column `i` is the wrench (force; moment about `com`)
/// of a unit tension on the `i`-th geometry.
pub fn wrench_matrix(
    geometries: &[&WireGeometry],
    com: &Vector3<f64>,
) -> Result<OMatrix<f64, U6, Dyn>, KinematicsError> {
    if geometries.is_empty() {
        return Err(KinematicsError::NoActiveWires);
    }
    let mut m = OMatrix::<f64, U6, Dyn>::zeros(geometries.len());
    for (i, g) in geometries.iter().enumerate() {
        if g.internal {
            return Err(KinematicsError::InternalWireActive(g.wire_id));
        }
        m.set_column(i, &g.wrench(1.0, com).to_vector());
    }
    Ok(m)
}
