#![no_main]

use libfuzzer_sys::fuzz_target;
use repcoach::reachability::robots::mobile_manipulator;
use repcoach::reachability::{coverage, parse_targets_csv, ReachabilityConfig, RobotModel};

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = parse_targets_csv(data) {
        let robot = RobotModel::MobileManipulator(mobile_manipulator());
        let report = coverage(&robot, &points, &ReachabilityConfig::default()).expect("parsed points are finite");
        assert_eq!(report.flags.len(), points.len());
    }
});
