//! Built-in robot descriptions.
//!
//! The dual-arm model is a fixed torso with two seven-joint arms
//! (shoulder yaw and pitch, upper-arm roll, elbow pitch, forearm roll, wrist
//! pitch and roll) mounted 0.26 m either side of the torso axis at 1.0 m,
//! each yawed 45 degrees outward. Link lengths follow common research
//! torsos plus a 0.2 m hand; the reach is about 1.2 m from the shoulder.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{Isometry3, Translation3, UnitQuaternion};

use super::kinematics::{Joint, SerialChain};
use super::{BasePose, FixedDualArm, MobileManipulator};
use crate::Vec3;

pub const ARM_MOUNT_HEIGHT_M: f64 = 1.0;
pub const ARM_MOUNT_LATERAL_M: f64 = 0.26;
const ARM_MOUNT_FORWARD_M: f64 = 0.064;

/// One arm. `lateral` is +1 for the robot's left arm and -1 for its right.
pub fn seven_dof_arm(lateral: f64) -> SerialChain {
    let mount = Isometry3::from_parts(
        Translation3::new(ARM_MOUNT_FORWARD_M, lateral * ARM_MOUNT_LATERAL_M, ARM_MOUNT_HEIGHT_M),
        UnitQuaternion::from_axis_angle(&Vec3::z_axis(), lateral * FRAC_PI_4),
    );
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    SerialChain {
        mount,
        joints: vec![
            Joint::revolute(z, [0.069, 0.0, 0.270], (-1.70, 1.70)),
            Joint::revolute(y, [0.102, 0.0, 0.0], (-2.147, 1.047)),
            Joint::revolute(x, [0.262, 0.0, 0.0], (-3.05, 3.05)),
            Joint::revolute(y, [0.104, 0.0, 0.0], (-0.05, 2.618)),
            Joint::revolute(x, [0.271, 0.0, 0.0], (-3.059, 3.059)),
            Joint::revolute(y, [0.116, 0.0, 0.0], (-1.571, 2.094)),
            Joint::revolute(x, [0.200, 0.0, 0.0], (-3.059, 3.059)),
        ],
    }
}

/// Dual-arm robot standing at `base`.
pub fn fixed_dual_arm(base: BasePose) -> FixedDualArm {
    FixedDualArm {
        arms: vec![seven_dof_arm(1.0), seven_dof_arm(-1.0)],
        base,
    }
}

/// Standoff between the user's hip center and the robot base. Kicks reach
/// about 0.8 m forward and the pedestal is roughly 0.35 m in radius, so
/// anything closer risks contact outside the pad.
pub const HOME_STANDOFF_M: f64 = 1.2;

/// Base placement facing a user whose hips are above the world origin.
pub fn fixed_dual_arm_home() -> BasePose {
    BasePose {
        x: HOME_STANDOFF_M,
        y: 0.0,
        theta: std::f64::consts::PI,
    }
}

/// Mobile manipulator with a vertical lift and a telescoping arm. The
/// contact pad sits 0.15 m above the lift carriage.
pub fn mobile_manipulator() -> MobileManipulator {
    MobileManipulator {
        lift: (0.05, 1.10),
        extension: (0.0, 0.52),
        tool_offset: 0.15,
    }
}
