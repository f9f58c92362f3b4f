use std::f64::consts::FRAC_PI_2;

use nalgebra::{UnitQuaternion, Vector3};

/// Pitch magnitude beyond which roll and yaw are no longer well separated.
pub const GIMBAL_MARGIN: f64 = 1e-6;

/// Intrinsic Z-Y-X angles: yaw about z, then pitch about the new y, then roll
/// about the new x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZyx {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub near_gimbal_lock: bool,
}

pub fn euler_zyx(q: &UnitQuaternion<f64>) -> EulerZyx {
    let r = q.to_rotation_matrix();
    let m = r.matrix();
    // atan2 keeps pitch accurate near ±π/2 where asin loses half its digits.
    let pitch = (-m[(2, 0)]).atan2((m[(0, 0)] * m[(0, 0)] + m[(1, 0)] * m[(1, 0)]).sqrt());
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    EulerZyx { roll, pitch, yaw, near_gimbal_lock: pitch.abs() > FRAC_PI_2 - GIMBAL_MARGIN }
}

pub fn quaternion_from_euler_zyx(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw)
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), pitch)
        * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), roll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_is_zero() {
        let e = euler_zyx(&UnitQuaternion::identity());
        assert_eq!((e.roll, e.pitch, e.yaw), (0.0, 0.0, 0.0));
        assert!(!e.near_gimbal_lock);
    }

    #[test]
    fn quarter_turn_about_y() {
        let e = euler_zyx(&UnitQuaternion::from_axis_angle(&Vector3::y_axis(), FRAC_PI_2));
        assert!((e.pitch - FRAC_PI_2).abs() < 1e-9, "{}", e.pitch);
        assert!(e.near_gimbal_lock);
    }

    #[test]
    fn composed_rotations_come_back() {
        let q = quaternion_from_euler_zyx(0.1, 0.2, 0.3);
        let e = euler_zyx(&q);
        assert!((e.roll - 0.1).abs() < 1e-15);
        assert!((e.pitch - 0.2).abs() < 1e-15);
        assert!((e.yaw - 0.3).abs() < 1e-15);
        // Same convention as nalgebra's roll/pitch/yaw constructor.
        let n = UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3);
        assert!(q.angle_to(&n) < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip(
            roll in (-PI + 1e-9)..PI,
            pitch in (-FRAC_PI_2 + 0.01)..(FRAC_PI_2 - 0.01),
            yaw in (-PI + 1e-9)..PI,
        ) {
            let e = euler_zyx(&quaternion_from_euler_zyx(roll, pitch, yaw));
            prop_assert!((e.roll - roll).abs() < 1e-9);
            prop_assert!((e.pitch - pitch).abs() < 1e-9);
            prop_assert!((e.yaw - yaw).abs() < 1e-9);
        }
    }
}
