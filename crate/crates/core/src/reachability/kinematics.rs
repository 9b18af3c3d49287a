//! Serial chains and their forward kinematics.

use nalgebra::{Isometry3, Matrix3xX, Translation3, Unit, UnitQuaternion};

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointType {
    Revolute,
    Prismatic,
}

/// One joint followed by the rigid link to the next joint frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub kind: JointType,
    /// Joint axis in the joint's own frame.
    pub axis: Unit<Vec3>,
    /// Translation from this joint frame to the next, applied after the
    /// joint motion.
    pub offset: Vec3,
    /// Radians for revolute joints, meters for prismatic ones.
    pub limits: (f64, f64),
}

impl Joint {
    pub fn revolute(axis: Vec3, offset: [f64; 3], limits: (f64, f64)) -> Self {
        Self {
            kind: JointType::Revolute,
            axis: Unit::new_normalize(axis),
            offset: Vec3::from(offset),
            limits,
        }
    }

    pub fn prismatic(axis: Vec3, offset: [f64; 3], limits: (f64, f64)) -> Self {
        Self {
            kind: JointType::Prismatic,
            axis: Unit::new_normalize(axis),
            offset: Vec3::from(offset),
            limits,
        }
    }

    fn motion(&self, q: f64) -> Isometry3<f64> {
        match self.kind {
            JointType::Revolute => Isometry3::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&self.axis, q),
            ),
            JointType::Prismatic => Isometry3::from_parts(
                Translation3::from(self.axis.into_inner() * q),
                UnitQuaternion::identity(),
            ),
        }
    }

    pub fn clamp(&self, q: f64) -> f64 {
        q.clamp(self.limits.0, self.limits.1)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.limits.0 + self.limits.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerialChain {
    /// Pose of the first joint frame in the robot base frame.
    pub mount: Isometry3<f64>,
    pub joints: Vec<Joint>,
}

/// Joint origins and axes in the base frame, plus the end-effector position.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    pub origins: Vec<Vec3>,
    pub axes: Vec<Vec3>,
    pub end_effector: Vec3,
}

impl SerialChain {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, j) in self.joints.iter().enumerate() {
            let (lo, hi) = j.limits;
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::validation(format!("joint {i} limits"), format!("[{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    pub fn check_joints(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.joints.len() {
            return Err(Error::validation(
                "joint_values",
                format!("expected {} values, got {}", self.joints.len(), q.len()),
            ));
        }
        for (i, (j, &v)) in self.joints.iter().zip(q).enumerate() {
            if !(v >= j.limits.0 && v <= j.limits.1) {
                return Err(Error::validation(
                    format!("joint {i}"),
                    format!("{v} outside [{}, {}]", j.limits.0, j.limits.1),
                ));
            }
        }
        Ok(())
    }

    /// Upper bound on the distance from the mount origin to the end effector.
    pub fn max_reach(&self) -> f64 {
        self.joints
            .iter()
            .map(|j| {
                let travel = match j.kind {
                    JointType::Revolute => 0.0,
                    JointType::Prismatic => j.limits.0.abs().max(j.limits.1.abs()),
                };
                j.offset.norm() + travel
            })
            .sum()
    }

    /// Frames without limit checks; used inside the IK loop.
    pub(crate) fn frames_unchecked(&self, q: &[f64]) -> ChainFrames {
        let mut pose = self.mount;
        let mut origins = Vec::with_capacity(q.len());
        let mut axes = Vec::with_capacity(q.len());
        for (joint, &v) in self.joints.iter().zip(q) {
            origins.push(pose.translation.vector);
            axes.push(pose.rotation * joint.axis.into_inner());
            pose = pose * joint.motion(v) * Translation3::from(joint.offset);
        }
        ChainFrames {
            origins,
            axes,
            end_effector: pose.translation.vector,
        }
    }

    pub fn frames(&self, q: &[f64]) -> Result<ChainFrames> {
        self.check_joints(q)?;
        Ok(self.frames_unchecked(q))
    }

    /// Position Jacobian (3 x dof) in the base frame.
    pub(crate) fn position_jacobian(&self, frames: &ChainFrames) -> Matrix3xX<f64> {
        let mut jac = Matrix3xX::zeros(self.joints.len());
        for (i, joint) in self.joints.iter().enumerate() {
            let col = match joint.kind {
                JointType::Revolute => frames.axes[i].cross(&(frames.end_effector - frames.origins[i])),
                JointType::Prismatic => frames.axes[i],
            };
            jac.set_column(i, &col);
        }
        jac
    }
}

/// End-effector position of `chain` in its base frame.
pub fn forward_kinematics(chain: &SerialChain, joint_values: &[f64]) -> Result<Vec3> {
    Ok(chain.frames(joint_values)?.end_effector)
}
