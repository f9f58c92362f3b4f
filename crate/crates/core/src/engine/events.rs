use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::kinematics::BodyFrames;
use crate::model::{PointRef, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// First ground contact of a contact point.
    TouchDown { t: f64, point: PointRef },
    /// First crossing of the kick target plane by the designated foot point;
    /// `approach_speed` is the foot speed along the plane normal, m/s.
    KickContact { t: f64, foot: PointRef, approach_speed: f64 },
}

impl Event {
    pub fn time(&self) -> f64 {
        match *self {
            Event::TouchDown { t, .. } | Event::KickContact { t, .. } => t,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Event::TouchDown { .. } => "TouchDown",
            Event::KickContact { .. } => "KickContact",
        }
    }
}

/// `TouchDown@t:segment/point` or `KickContact@t:segment/point:speed`.
impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::TouchDown { t, point } => write!(f, "TouchDown@{t}:{point}"),
            Event::KickContact { t, foot, approach_speed } => {
                write!(f, "KickContact@{t}:{foot}:{approach_speed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadEvent(pub String);

impl fmt::Display for BadEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed event `{}`", self.0)
    }
}

impl std::error::Error for BadEvent {}

impl FromStr for Event {
    type Err = BadEvent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadEvent(s.to_string());
        let (kind, rest) = s.split_once('@').ok_or_else(bad)?;
        let mut parts = rest.split(':');
        let t: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let point =
            parts.next().and_then(|p| p.split_once('/')).map(|(seg, pt)| PointRef::new(seg, pt)).ok_or_else(bad)?;
        let event = match kind {
            "TouchDown" => Event::TouchDown { t, point },
            "KickContact" => {
                let approach_speed = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                Event::KickContact { t, foot: point, approach_speed }
            }
            _ => return Err(bad()),
        };
        match parts.next() {
            None => Ok(event),
            Some(_) => Err(bad()),
        }
    }
}

/// Tracks first contacts across ticks.
#[derive(Debug, Clone, Default)]
pub struct EventDetector {
    touched: BTreeSet<PointRef>,
    kicked: bool,
    last_distance: Option<(f64, f64)>,
}

impl EventDetector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn detect(&mut self, t: f64, frames: &BodyFrames<'_>, scenario: &Scenario) -> Vec<Event> {
        let mut events = Vec::new();
        if scenario.contact.enabled {
            let model = frames.model();
            for (seg, name, p) in frames.contact_points() {
                if p.z < 0.0 {
                    let point = PointRef::new(model.segments()[seg].name.clone(), name);
                    if self.touched.insert(point.clone()) {
                        events.push(Event::TouchDown { t, point });
                    }
                }
            }
        }
        if let Some(target) = &scenario.kick_target {
            if let Ok(p) = frames.point(&target.foot) {
                let d = target.signed_distance(&p);
                if let Some((t0, d0)) = self.last_distance {
                    if !self.kicked && d0 < 0.0 && d >= 0.0 {
                        self.kicked = true;
                        let approach_speed = if t > t0 { (d - d0) / (t - t0) } else { 0.0 };
                        events.push(Event::KickContact { t, foot: target.foot.clone(), approach_speed });
                    }
                }
                self.last_distance = Some((t, d));
            }
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips() {
        for e in [
            Event::TouchDown { t: 61.234, point: PointRef::new("leg_r", "heel") },
            Event::KickContact { t: 25.5, foot: PointRef::new("leg_r", "toe"), approach_speed: -0.1 },
        ] {
            assert_eq!(e.to_string().parse::<Event>().unwrap(), e);
        }
        assert!("Jump@1:a/b".parse::<Event>().is_err());
        assert!("TouchDown@x:a/b".parse::<Event>().is_err());
    }
}
