//! Which exercise targets can a robot touch?
//!
//! Targets are world-frame points. The user's hip center sits above the world
//! origin, facing +X, so hip-frame targets only need a vertical shift (see
//! [`hip_to_world`]). A target counts as reachable when some joint
//! configuration puts the contact point within `tolerance` of it, with any
//! orientation.

pub mod ik;
pub mod kinematics;
pub mod robots;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::body::BodyDimensions;
use crate::cmaes::{cma_es_minimize, CmaEsConfig};
use crate::error::{Error, Result};
use crate::exercise::{catalog, Posture, Side};
use crate::Vec3;
use ik::{start_configurations, IkParams};
use kinematics::SerialChain;

/// Hip height of a seated user; the seat top is at this height.
pub const SEAT_HEIGHT_M: f64 = 0.45;
pub const IK_DAMPING: f64 = 0.05;
const IK_MAX_STEP: f64 = 0.5;
/// Width of the sigmoid used to smooth the reachable count.
pub const SMOOTHING_WIDTH_M: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    /// Heading about +Z, radians.
    pub theta: f64,
}

impl BasePose {
    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::new(self.x, self.y, 0.0),
            UnitQuaternion::from_axis_angle(&Vec3::z_axis(), self.theta),
        )
    }

    fn to_local(&self, p: &Vec3) -> Vec3 {
        self.isometry().inverse_transform_point(&Point3::from(*p)).coords
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobileManipulator {
    /// Lift carriage travel, meters above the floor.
    pub lift: (f64, f64),
    pub extension: (f64, f64),
    /// Height of the contact point above the carriage.
    pub tool_offset: f64,
}

impl MobileManipulator {
    /// Contact-point heights the robot can hold, before tolerance.
    pub fn vertical_span(&self) -> (f64, f64) {
        (self.lift.0 + self.tool_offset, self.lift.1 + self.tool_offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedDualArm {
    pub arms: Vec<SerialChain>,
    pub base: BasePose,
}

impl FixedDualArm {
    pub fn at(&self, base: BasePose) -> Self {
        Self {
            arms: self.arms.clone(),
            base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobotModel {
    MobileManipulator(MobileManipulator),
    FixedDualArm(FixedDualArm),
}

impl RobotModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            RobotModel::MobileManipulator(m) => {
                if !(m.lift.0 < m.lift.1) {
                    return Err(Error::validation("lift", "z_lo must be below z_hi"));
                }
                if !(m.extension.0 < m.extension.1) {
                    return Err(Error::validation("extension", "e_lo must be below e_hi"));
                }
                if !m.tool_offset.is_finite() {
                    return Err(Error::validation("tool_offset", "must be finite"));
                }
            }
            RobotModel::FixedDualArm(r) => {
                if r.arms.len() != 2 {
                    return Err(Error::validation("arms", format!("expected 2 chains, got {}", r.arms.len())));
                }
                for arm in &r.arms {
                    if arm.dof() < 6 {
                        return Err(Error::validation("arms", format!("chain has {} joints, need at least 6", arm.dof())));
                    }
                    arm.validate()?;
                }
                let b = r.base;
                if !(b.x.is_finite() && b.y.is_finite() && b.theta.is_finite()) {
                    return Err(Error::validation("base_pose", "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn base_pose(&self) -> Option<BasePose> {
        match self {
            RobotModel::MobileManipulator(_) => None,
            RobotModel::FixedDualArm(r) => Some(r.base),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachabilityConfig {
    pub tolerance: f64,
    pub ik_restarts: usize,
    pub ik_iterations: usize,
    pub seed: u64,
}

impl Default for ReachabilityConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.02,
            ik_restarts: 8,
            ik_iterations: 100,
            seed: 0,
        }
    }
}

impl ReachabilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::validation("tolerance", "must be positive"));
        }
        if self.ik_restarts == 0 {
            return Err(Error::validation("ik_restarts", "must be at least 1"));
        }
        if self.ik_iterations == 0 {
            return Err(Error::validation("ik_iterations", "must be at least 1"));
        }
        Ok(())
    }

    fn ik_params(&self) -> IkParams {
        IkParams {
            tolerance: self.tolerance,
            iterations: self.ik_iterations,
            damping: IK_DAMPING,
            max_step: IK_MAX_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub total: usize,
    pub reachable: usize,
    pub fraction: f64,
    pub flags: Vec<bool>,
    pub base_pose: Option<BasePose>,
    /// Planar distance from the base to the centroid of the targets; small
    /// values mean the robot would stand where the user is.
    pub base_to_centroid: Option<f64>,
}

impl ReachabilityReport {
    fn new(flags: Vec<bool>, base_pose: Option<BasePose>, targets: &[Vec3]) -> Self {
        let total = flags.len();
        let reachable = flags.iter().filter(|&&f| f).count();
        let base_to_centroid = base_pose.map(|b| {
            let c = targets.iter().fold(Vec3::zeros(), |acc, p| acc + p) / targets.len() as f64;
            (c.x - b.x).hypot(c.y - b.y)
        });
        Self {
            total,
            reachable,
            fraction: reachable as f64 / total as f64,
            flags,
            base_pose,
            base_to_centroid,
        }
    }
}

/// A joint solution for one arm of a fixed robot.
#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub arm: usize,
    pub joints: Vec<f64>,
    /// Position error, meters.
    pub error: f64,
}

/// Per-arm start configurations, drawn once so every target sees the same
/// restarts regardless of evaluation order.
struct DualArmSolver<'a> {
    robot: &'a FixedDualArm,
    starts: Vec<Vec<Vec<f64>>>,
    params: IkParams,
}

impl<'a> DualArmSolver<'a> {
    fn new(robot: &'a FixedDualArm, cfg: &ReachabilityConfig) -> Self {
        let starts = robot
            .arms
            .iter()
            .enumerate()
            .map(|(i, arm)| start_configurations(arm, cfg.ik_restarts, cfg.seed.wrapping_add(i as u64)))
            .collect();
        Self {
            robot,
            starts,
            params: cfg.ik_params(),
        }
    }

    /// Best solution across both arms for a world-frame target. Arms that
    /// cannot possibly reach are skipped and report their reach gap.
    fn solve(&self, target: &Vec3, base: &BasePose) -> IkSolution {
        let local = base.to_local(target);
        let mut best = IkSolution {
            arm: 0,
            joints: Vec::new(),
            error: f64::INFINITY,
        };
        for (i, arm) in self.robot.arms.iter().enumerate() {
            let gap = (local - arm.mount.translation.vector).norm() - arm.max_reach();
            let candidate = if gap > self.params.tolerance {
                IkSolution {
                    arm: i,
                    joints: self.starts[i][0].clone(),
                    error: gap,
                }
            } else {
                let out = ik::solve(arm, &local, &self.starts[i], &self.params);
                IkSolution {
                    arm: i,
                    joints: out.joints,
                    error: out.error,
                }
            };
            if candidate.error < best.error {
                best = candidate;
            }
            if best.error <= self.params.tolerance {
                break;
            }
        }
        best
    }
}

fn check_target(p: &Vec3) -> Result<()> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation("target", "coordinates must be finite"))
    }
}

/// IK solution for a fixed robot when the target is reachable.
pub fn reach_solution(robot: &FixedDualArm, target: &Vec3, cfg: &ReachabilityConfig) -> Result<Option<IkSolution>> {
    cfg.validate()?;
    check_target(target)?;
    let sol = DualArmSolver::new(robot, cfg).solve(target, &robot.base);
    Ok((sol.error <= cfg.tolerance).then_some(sol))
}

pub fn is_reachable(robot: &RobotModel, target: &Vec3, cfg: &ReachabilityConfig) -> Result<bool> {
    cfg.validate()?;
    check_target(target)?;
    Ok(match robot {
        RobotModel::MobileManipulator(m) => mobile_reachable(m, target, cfg.tolerance),
        RobotModel::FixedDualArm(r) => reach_solution(r, target, cfg)?.is_some(),
    })
}

fn mobile_reachable(m: &MobileManipulator, target: &Vec3, tol: f64) -> bool {
    let (lo, hi) = m.vertical_span();
    target.z >= lo - tol && target.z <= hi + tol
}

pub fn coverage(robot: &RobotModel, targets: &[Vec3], cfg: &ReachabilityConfig) -> Result<ReachabilityReport> {
    robot.validate()?;
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::validation("targets", "at least one target is required"));
    }
    targets.iter().try_for_each(check_target)?;
    let flags = match robot {
        RobotModel::MobileManipulator(m) => targets.iter().map(|t| mobile_reachable(m, t, cfg.tolerance)).collect(),
        RobotModel::FixedDualArm(r) => {
            let solver = DualArmSolver::new(r, cfg);
            targets
                .iter()
                .map(|t| solver.solve(t, &r.base).error <= cfg.tolerance)
                .collect()
        }
    };
    Ok(ReachabilityReport::new(flags, robot.base_pose(), targets))
}

/// Search budget for [`optimize_base`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseSearchConfig {
    /// Initial step size; applied to meters and radians alike.
    pub sigma0: f64,
    pub max_evals: usize,
    /// IK restarts used inside the smoothed objective. The final report
    /// always uses the full configuration.
    pub objective_restarts: usize,
}

impl Default for BaseSearchConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.3,
            max_evals: 120,
            objective_restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseOptimization {
    pub initial: ReachabilityReport,
    pub optimized: ReachabilityReport,
    pub evaluations: usize,
}

/// Smoothed reachable count: each target contributes a sigmoid of how far
/// its best IK error is inside the tolerance.
pub fn smoothed_coverage(robot: &FixedDualArm, targets: &[Vec3], cfg: &ReachabilityConfig, base: &BasePose) -> f64 {
    let solver = DualArmSolver::new(robot, cfg);
    targets
        .iter()
        .map(|t| {
            let e = solver.solve(t, base).error;
            1.0 / (1.0 + (-(cfg.tolerance - e) / SMOOTHING_WIDTH_M).exp())
        })
        .sum()
}

/// Searches (x, y, theta) for the fixed robot's base with CMA-ES, starting
/// from its current base. The returned optimized report is never worse than
/// the initial one: if the search does not strictly improve the exact count,
/// the initial pose is kept.
pub fn optimize_base(
    robot: &FixedDualArm,
    targets: &[Vec3],
    cfg: &ReachabilityConfig,
    search: &BaseSearchConfig,
) -> Result<BaseOptimization> {
    if !(search.sigma0 > 0.0) || search.max_evals == 0 || search.objective_restarts == 0 {
        return Err(Error::validation("base_search", "sigma0, max_evals and objective_restarts must be positive"));
    }
    let model = RobotModel::FixedDualArm(robot.clone());
    let initial = coverage(&model, targets, cfg)?;

    let inner = ReachabilityConfig {
        ik_restarts: search.objective_restarts.min(cfg.ik_restarts),
        ..*cfg
    };
    let objective = |v: &[f64]| {
        let pose = BasePose {
            x: v[0],
            y: v[1],
            theta: v[2],
        };
        -smoothed_coverage(robot, targets, &inner, &pose)
    };
    let b = robot.base;
    let cma = CmaEsConfig {
        max_evals: search.max_evals,
        tol_fun: 1e-9,
        tol_x: 1e-6,
        f_target: Some(-(targets.len() as f64)),
        lambda: None,
        seed: cfg.seed,
    };
    let result = cma_es_minimize(objective, &[b.x, b.y, b.theta], search.sigma0, &cma)?;
    let pose = BasePose {
        x: result.x_best[0],
        y: result.x_best[1],
        theta: result.x_best[2],
    };
    let candidate = coverage(&RobotModel::FixedDualArm(robot.at(pose)), targets, cfg)?;
    let optimized = if candidate.reachable > initial.reachable {
        candidate
    } else {
        initial.clone()
    };
    assert!(optimized.reachable >= initial.reachable);
    Ok(BaseOptimization {
        initial,
        optimized,
        evaluations: result.evaluations,
    })
}

/// World position of a hip-frame point for a user in `posture`.
pub fn hip_to_world(p: &Vec3, posture: Posture, body: &BodyDimensions) -> Vec3 {
    let hip = match posture {
        Posture::Seated => SEAT_HEIGHT_M,
        Posture::Standing => body.standing_hip_height,
    };
    Vec3::new(p.x, p.y, p.z + hip)
}

pub const CLOUD_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// World-frame targets for every repetition exercise in the catalog, both
/// sides, at each of [`CLOUD_FRACTIONS`]. Timed Up and Go is left out: its
/// "target" is the robot driving away, which a fixed robot cannot do at all.
pub fn exercise_cloud(body: &BodyDimensions) -> Result<Vec<Vec3>> {
    let mut cloud = Vec::new();
    for model in catalog().into_iter().filter(|m| m.is_repetition()) {
        for side in Side::BOTH {
            for f in CLOUD_FRACTIONS {
                let t = model.target_set(body, f, side)?;
                cloud.push(hip_to_world(&t.x_target, model.posture, body));
            }
        }
    }
    Ok(cloud)
}

/// Reads an `x,y,z` CSV of target points in meters.
pub fn parse_targets_csv<R: std::io::Read>(reader: R) -> Result<Vec<Vec3>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "z"] {
        return Err(Error::parse(1, "expected header `x,y,z`"));
    }
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, found {}", record.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(record.iter()) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("`{field}` is not a finite number")))?;
        }
        points.push(Vec3::from(xyz));
    }
    if points.is_empty() {
        return Err(Error::validation("targets", "at least one target is required"));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use robots::{fixed_dual_arm, fixed_dual_arm_home, mobile_manipulator};

    fn fast() -> ReachabilityConfig {
        ReachabilityConfig {
            ik_restarts: 4,
            ..Default::default()
        }
    }

    #[test]
    fn mobile_examples() {
        let m = MobileManipulator {
            lift: (0.1, 1.1),
            extension: (0.0, 0.5),
            tool_offset: 0.0,
        };
        let robot = RobotModel::MobileManipulator(m);
        let cfg = ReachabilityConfig::default();
        assert!(is_reachable(&robot, &Vec3::new(0.3, -2.0, 0.5), &cfg).unwrap());
        assert!(!is_reachable(&robot, &Vec3::new(0.0, 0.0, 3.0), &cfg).unwrap());
        assert!(is_reachable(&robot, &Vec3::new(0.0, 0.0, 1.115), &cfg).unwrap());
        assert!(!is_reachable(&robot, &Vec3::new(0.0, 0.0, 0.07), &cfg).unwrap());
    }

    #[test]
    fn far_target_is_unreachable_for_fixed_arm() {
        let robot = fixed_dual_arm(BasePose {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        });
        let cfg = fast();
        let far = Vec3::new(5.0, 0.0, 1.0);
        assert!(!is_reachable(&RobotModel::FixedDualArm(robot.clone()), &far, &cfg).unwrap());
        let near = Vec3::new(0.6, 0.5, 1.0);
        let sol = reach_solution(&robot, &near, &cfg).unwrap().unwrap();
        let local = robot.base.to_local(&near);
        let p = kinematics::forward_kinematics(&robot.arms[sol.arm], &sol.joints).unwrap();
        assert!((p - local).norm() <= cfg.tolerance);
    }

    #[test]
    fn empty_and_bad_inputs() {
        let robot = RobotModel::MobileManipulator(mobile_manipulator());
        let cfg = ReachabilityConfig::default();
        assert!(coverage(&robot, &[], &cfg).is_err());
        assert!(is_reachable(&robot, &Vec3::new(f64::NAN, 0.0, 0.0), &cfg).is_err());
        let bad = ReachabilityConfig {
            tolerance: 0.0,
            ..cfg
        };
        assert!(coverage(&robot, &[Vec3::zeros()], &bad).is_err());
        let mut short = fixed_dual_arm(fixed_dual_arm_home());
        short.arms[0].joints.truncate(5);
        assert!(RobotModel::FixedDualArm(short).validate().is_err());
    }

    #[test]
    fn coverage_counts_match_per_point_calls() {
        let body = BodyDimensions::from_height(1.7);
        let cloud = exercise_cloud(&body).unwrap();
        let robot = RobotModel::FixedDualArm(fixed_dual_arm(fixed_dual_arm_home()));
        let cfg = fast();
        let report = coverage(&robot, &cloud[..30], &cfg).unwrap();
        let expected: Vec<bool> = cloud[..30].iter().map(|t| is_reachable(&robot, t, &cfg).unwrap()).collect();
        assert_eq!(report.flags, expected);
        assert_eq!(report.total, 30);
        assert_eq!(report.fraction, report.reachable as f64 / 30.0);

        let mut reversed = cloud[..30].to_vec();
        reversed.reverse();
        let mut flags = coverage(&robot, &reversed, &cfg).unwrap().flags;
        flags.reverse();
        assert_eq!(flags, report.flags);
    }

    #[test]
    fn mobile_covers_every_cloud() {
        let robot = RobotModel::MobileManipulator(mobile_manipulator());
        for h in [1.5, 1.7, 1.9] {
            let cloud = exercise_cloud(&BodyDimensions::from_height(h)).unwrap();
            let r = coverage(&robot, &cloud, &ReachabilityConfig::default()).unwrap();
            assert_eq!(r.fraction, 1.0, "height {h}");
        }
    }

    #[test]
    fn frame_invariance() {
        let body = BodyDimensions::from_height(1.65);
        let cloud = exercise_cloud(&body).unwrap();
        let base = fixed_dual_arm_home();
        let cfg = fast();
        let original = coverage(&RobotModel::FixedDualArm(fixed_dual_arm(base)), &cloud, &cfg).unwrap();

        let shift = BasePose {
            x: -2.0,
            y: 3.5,
            theta: 0.9,
        };
        let g = shift.isometry();
        let moved: Vec<Vec3> = cloud.iter().map(|p| g.transform_point(&Point3::from(*p)).coords).collect();
        let moved_base_t = g.transform_point(&Point3::new(base.x, base.y, 0.0));
        let moved_base = BasePose {
            x: moved_base_t.x,
            y: moved_base_t.y,
            theta: base.theta + shift.theta,
        };
        let moved_report = coverage(&RobotModel::FixedDualArm(fixed_dual_arm(moved_base)), &moved, &cfg).unwrap();
        assert!((original.fraction - moved_report.fraction).abs() <= 1e-9);
        assert_eq!(original.flags, moved_report.flags);
    }

    #[test]
    fn coverage_grows_with_tolerance() {
        let cloud = exercise_cloud(&BodyDimensions::from_height(1.6)).unwrap();
        let robot = RobotModel::FixedDualArm(fixed_dual_arm(fixed_dual_arm_home()));
        let mut last = 0.0;
        for tol in [0.005, 0.02, 0.1, 0.5, 3.0] {
            let cfg = ReachabilityConfig {
                tolerance: tol,
                ..fast()
            };
            let f = coverage(&robot, &cloud, &cfg).unwrap().fraction;
            assert!(f >= last, "tolerance {tol}: {f} < {last}");
            last = f;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn single_target_is_covered_after_search() {
        let robot = fixed_dual_arm(BasePose {
            x: 3.0,
            y: 0.0,
            theta: 0.0,
        });
        let targets = [Vec3::new(1.0, 0.0, 0.9)];
        let cfg = fast();
        let search = BaseSearchConfig {
            max_evals: 400,
            ..Default::default()
        };
        let out = optimize_base(&robot, &targets, &cfg, &search).unwrap();
        assert_eq!(out.initial.fraction, 0.0);
        assert_eq!(out.optimized.fraction, 1.0);
    }

    #[test]
    fn distant_clusters_cannot_all_be_covered() {
        let robot = fixed_dual_arm(BasePose {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        });
        let reach = robot.arms[0].max_reach() + robots::ARM_MOUNT_LATERAL_M;
        let sep = 2.0 * reach + 1.0;
        let targets = [
            Vec3::new(0.6, 0.0, 0.9),
            Vec3::new(0.6, 0.1, 1.0),
            Vec3::new(0.6 + sep, 0.0, 0.9),
            Vec3::new(0.6 + sep, 0.1, 1.0),
        ];
        let cfg = fast();
        let out = optimize_base(&robot, &targets, &cfg, &BaseSearchConfig::default()).unwrap();
        assert!(out.optimized.fraction < 1.0);
        assert!(out.optimized.reachable >= out.initial.reachable);
    }

    #[test]
    fn targets_csv() {
        let pts = parse_targets_csv("x,y,z\n0.1, 0.2, 0.3\n1,2,3\n".as_bytes()).unwrap();
        assert_eq!(pts, vec![Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 2.0, 3.0)]);
        let err = parse_targets_csv("x,y,z\n0,0,0\n1,oops,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_targets_csv("x,y,z\n0,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_targets_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(parse_targets_csv("x,y,z\n".as_bytes()).is_err());
    }
}
