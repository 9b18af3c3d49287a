//! Position-only damped-least-squares IK with restarts.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kinematics::SerialChain;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkParams {
    /// Accept as soon as the position error is at or below this (m).
    pub tolerance: f64,
    pub iterations: usize,
    pub damping: f64,
    /// Largest joint step per iteration (rad or m).
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkOutcome {
    pub joints: Vec<f64>,
    pub error: f64,
}

/// Start configurations: the mid-range pose followed by `restarts - 1`
/// uniform samples within the joint limits.
pub fn start_configurations(chain: &SerialChain, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![chain.joints.iter().map(|j| j.midpoint()).collect::<Vec<_>>()];
    for _ in 1..restarts.max(1) {
        starts.push(chain.joints.iter().map(|j| rng.gen_range(j.limits.0..=j.limits.1)).collect());
    }
    starts
}

/// Runs DLS from each start until one reaches `tolerance`; returns the best
/// configuration seen. `target` is in the chain's base frame.
pub fn solve(chain: &SerialChain, target: &Vec3, starts: &[Vec<f64>], params: &IkParams) -> IkOutcome {
    let mut best = IkOutcome {
        joints: starts.first().cloned().unwrap_or_default(),
        error: f64::INFINITY,
    };
    for start in starts {
        let outcome = descend(chain, target, start, params);
        if outcome.error < best.error {
            best = outcome;
        }
        if best.error <= params.tolerance {
            break;
        }
    }
    best
}

fn descend(chain: &SerialChain, target: &Vec3, start: &[f64], params: &IkParams) -> IkOutcome {
    let mut q = start.to_vec();
    let mut frames = chain.frames_unchecked(&q);
    let mut err = target - frames.end_effector;
    let mut best = IkOutcome {
        joints: q.clone(),
        error: err.norm(),
    };
    let mut stalled = 0;
    let lambda2 = params.damping * params.damping;

    for _ in 0..params.iterations {
        if best.error <= params.tolerance {
            break;
        }
        let jac = chain.position_jacobian(&frames);
        let a = &jac * jac.transpose() + Matrix3::identity() * lambda2;
        let Some(u) = a.lu().solve(&err) else { break };
        let mut dq = jac.transpose() * u;
        let largest = dq.amax();
        if largest > params.max_step {
            dq *= params.max_step / largest;
        }
        for ((v, d), joint) in q.iter_mut().zip(dq.iter()).zip(&chain.joints) {
            *v = joint.clamp(*v + d);
        }
        frames = chain.frames_unchecked(&q);
        err = target - frames.end_effector;
        let e = err.norm();
        if e < best.error - 1e-6 {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 8 {
                if e < best.error {
                    best = IkOutcome { joints: q, error: e };
                }
                return best;
            }
        }
        if e < best.error {
            best = IkOutcome {
                joints: q.clone(),
                error: e,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reachability::kinematics::forward_kinematics;
    use crate::reachability::robots::seven_dof_arm;

    fn params() -> IkParams {
        IkParams {
            tolerance: 1e-3,
            iterations: 200,
            damping: 0.05,
            max_step: 0.5,
        }
    }

    #[test]
    fn recovers_pose_of_known_configuration() {
        let chain = seven_dof_arm(1.0);
        let q = [0.2, -0.3, 0.4, 1.1, 0.2, 0.5, 0.0];
        let target = forward_kinematics(&chain, &q).unwrap();
        let starts = start_configurations(&chain, 8, 1);
        let out = solve(&chain, &target, &starts, &params());
        assert!(out.error <= 1e-3, "{}", out.error);
        let p = forward_kinematics(&chain, &out.joints).unwrap();
        assert!((p - target).norm() <= 1e-3);
    }

    #[test]
    fn starts_respect_limits() {
        let chain = seven_dof_arm(-1.0);
        let starts = start_configurations(&chain, 8, 3);
        assert_eq!(starts.len(), 8);
        for s in &starts {
            chain.check_joints(s).unwrap();
        }
        assert_eq!(starts, start_configurations(&chain, 8, 3));
    }

    #[test]
    fn far_target_reports_gap() {
        let chain = seven_dof_arm(1.0);
        let target = Vec3::new(5.0, 0.0, 1.0);
        let out = solve(&chain, &target, &start_configurations(&chain, 4, 0), &params());
        assert!(out.error > 3.0);
    }
}
