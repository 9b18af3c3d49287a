//! `repcoach` command line.
//!
//! Every subcommand reads and validates all of its inputs, computes its
//! results in memory, and only then writes output files (through a temporary
//! file renamed into place). Exit codes: 0 on success, 2 for invalid input or
//! usage, 1 for anything else.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::body::BodyDimensions;
use crate::calibration::run_calibration;
use crate::error::Error;
use crate::exercise::{find, Side};
use crate::reachability::robots::{fixed_dual_arm, fixed_dual_arm_home, mobile_manipulator};
use crate::reachability::{
    coverage, optimize_base, parse_targets_csv, BasePose, BaseSearchConfig, ReachabilityConfig, RobotModel,
    SEAT_HEIGHT_M,
};
use crate::session::config::{Override, SessionConfig};
use crate::session::events::serialize_log;
use crate::session::summary::{final_difficulties, summarize, to_csv};
use crate::session::{exercise_rng, run_session};
use crate::Vec3;

#[derive(Debug, Parser)]
#[command(name = "repcoach", version, about = "Personalized exercise targets, session simulation and reachability studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the difficulty points and target for one exercise.
    Targets(TargetsArgs),
    /// Simulate a session and write its event log and per-set summary.
    Simulate(SimulateArgs),
    /// Run the calibration sweep for one exercise.
    Calibrate(CalibrateArgs),
    /// Report which target points a robot can reach.
    Reachability(ReachabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Right,
    Left,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<Side> {
        match self {
            SideArg::Right => vec![Side::Right],
            SideArg::Left => vec![Side::Left],
            SideArg::Both => Side::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TargetsArgs {
    /// Body dimensions JSON.
    #[arg(long)]
    pub body: PathBuf,
    #[arg(long)]
    pub exercise: String,
    #[arg(long, allow_negative_numbers = true)]
    pub f_diff: f64,
    #[arg(long, value_enum, default_value = "right")]
    pub side: SideArg,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Session config, YAML or JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config override, `dotted.path=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// JSONL event log.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-set CSV summary; defaults to the log path with a `.csv` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Session config supplying the user and calibration settings.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub exercise: String,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RobotArg {
    /// Mobile manipulator with a lift and telescoping arm.
    Sws,
    /// Fixed-base dual-arm robot.
    #[value(name = "fixed_dual_arm")]
    FixedDualArm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    World,
    /// Points are relative to the user's hip center; `--hip-height` lifts
    /// them into the world frame.
    Hip,
}

#[derive(Debug, Args)]
pub struct ReachabilityArgs {
    /// CSV with header `x,y,z`, meters.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, value_enum)]
    pub robot: RobotArg,
    #[arg(long)]
    pub optimize_base: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "world")]
    pub frame: FrameArg,
    #[arg(long, default_value_t = SEAT_HEIGHT_M)]
    pub hip_height: f64,
    /// Overrides for `reach.*`, `base.*` and `search.*`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// JSON report.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-point CSV; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(stdout) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs one subcommand and returns what it prints to standard output.
pub fn execute(command: &Command) -> CliResult<String> {
    match command {
        Command::Targets(a) => cmd_targets(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Reachability(a) => cmd_reachability(a),
    }
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError {
            code: 2,
            message: format!("{}: no such file", path.display()),
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn parse_overrides(raw: &[String]) -> CliResult<Vec<Override>> {
    Ok(raw.iter().map(|s| Override::parse(s)).collect::<Result<_, _>>()?)
}

/// Writes every file or none: all contents go to temporaries in the target
/// directories first and are renamed into place afterwards.
fn write_outputs(files: &[(&Path, &str)]) -> CliResult<()> {
    let mut staged = Vec::new();
    for (path, contents) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        tmp.write_all(contents.as_bytes())
            .and_then(|_| tmp.flush())
            .map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| CliError::internal(format!("{}: {}", path.display(), e.error)))?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: String) -> CliResult<String> {
    match out {
        Some(path) => {
            write_outputs(&[(path, &text)])?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Pretty JSON with every non-integer number printed with six decimals.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat("  ").take(d));
    match value {
        Value::Number(n) if n.is_f64() => out.push_str(&fixed6(n.as_f64().unwrap_or(0.0))),
        Value::Array(items) if items.iter().all(|v| !v.is_array() && !v.is_object()) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, v, depth);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, v, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", Value::String(k.clone()));
                write_value(out, v, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Six-decimal fixed formatting that never prints a negative zero.
pub fn fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn vec_json(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

fn cmd_targets(a: &TargetsArgs) -> CliResult<String> {
    require_file(&a.body)?;
    let body = BodyDimensions::from_json(&read(&a.body)?)?;
    let model = find(&a.exercise)?;
    let mut sets = Vec::new();
    for side in a.side.sides() {
        let t = model.target_set(&body, a.f_diff, side)?;
        sets.push(json!({
            "exercise": model.id.as_str(),
            "side": side.as_str(),
            "f_diff": t.f_diff,
            "x_min": vec_json(&t.x_min),
            "x_0": vec_json(&t.x_0),
            "x_max": vec_json(&t.x_max),
            "x_target": vec_json(&t.x_target),
        }));
    }
    let doc = if sets.len() == 1 { sets.remove(0) } else { Value::Array(sets) };
    emit(a.out.as_deref(), render_json(&doc))
}

fn load_session_config(path: &Path, seed: Option<u64>, raw: &[String]) -> CliResult<SessionConfig> {
    require_file(path)?;
    let mut overrides = parse_overrides(raw)?;
    if let Some(seed) = seed {
        overrides.push(Override {
            path: vec!["seed".into()],
            value: json!(seed),
        });
    }
    let cfg = SessionConfig::load(path, &overrides)?;
    for file in cfg.word_files.values() {
        require_file(file)?;
    }
    Ok(cfg)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<String> {
    let cfg = load_session_config(&a.config, a.seed, &a.overrides)?;
    let plan = cfg.plan()?;
    let log = run_session(&plan, &cfg.user)?;
    let jsonl = serialize_log(&log);
    let summary = to_csv(&summarize(&log));
    let summary_path = a.summary.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    if summary_path == a.out {
        return Err(Error::validation("summary", "must differ from the log path").into());
    }
    write_outputs(&[(&a.out, &jsonl), (&summary_path, &summary)])?;

    let mut table = String::from("exercise                 f_diff_right  f_diff_left\n");
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fixed6);
    for (id, right, left) in final_difficulties(&log) {
        let _ = writeln!(table, "{:<24} {:>12}  {:>11}", id.as_str(), cell(right), cell(left));
    }
    Ok(table)
}

fn cmd_calibrate(a: &CalibrateArgs) -> CliResult<String> {
    let cfg = load_session_config(&a.config, a.seed, &a.overrides)?;
    cfg.calibration.validate()?;
    let model = find(&a.exercise)?;
    if !model.is_repetition() {
        return Err(Error::validation("exercise", format!("`{}` has no calibration sweep", model.id)).into());
    }
    // Same stream as the exercise's first occurrence in a simulated session,
    // so the two agree.
    let mut rng = exercise_rng(cfg.seed, cfg.user.rng_seed, model.id, 0);
    let wanted = a.side.sides();
    let mut results = Vec::new();
    for side in Side::BOTH {
        let r = run_calibration(&model, &cfg.user.body, side, &cfg.user, &cfg.calibration, &mut rng)?;
        if wanted.contains(&side) {
            let samples: Vec<Value> = r
                .samples
                .iter()
                .map(|s| json!({"fraction": s.fraction, "touched": s.touched, "time_to_touch": s.time_to_touch}))
                .collect();
            results.push(json!({
                "side": side.as_str(),
                "max_reached_fraction": r.max_reached_fraction,
                "f_diff_start": r.f_diff_start,
                "samples": samples,
            }));
        }
    }
    let doc = json!({
        "exercise": model.id.as_str(),
        "seed": cfg.seed,
        "results": results,
    });
    emit(a.out.as_deref(), render_json(&doc))
}

/// Tunable settings for the reachability subcommand, addressed by `--set`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReachabilityOptions {
    reach: ReachabilityConfig,
    base: BasePose,
    search: BaseSearchConfig,
}

fn cmd_reachability(a: &ReachabilityArgs) -> CliResult<String> {
    require_file(&a.targets)?;
    let overrides = parse_overrides(&a.overrides)?;
    let defaults = ReachabilityOptions {
        reach: ReachabilityConfig {
            seed: a.seed,
            ..Default::default()
        },
        base: fixed_dual_arm_home(),
        search: BaseSearchConfig::default(),
    };
    let mut doc = serde_json::to_value(&defaults).map_err(Error::from)?;
    for o in &overrides {
        o.apply(&mut doc)?;
    }
    let opts: ReachabilityOptions = serde_json::from_value(doc).map_err(Error::from)?;
    opts.reach.validate()?;
    if !a.hip_height.is_finite() {
        return Err(Error::validation("hip_height", "must be finite").into());
    }
    if a.optimize_base && a.robot == RobotArg::Sws {
        return Err(Error::validation("optimize_base", "only applies to fixed_dual_arm").into());
    }

    let file = std::fs::File::open(&a.targets).map_err(|e| Error::io(&a.targets, e))?;
    let input = parse_targets_csv(file)?;
    let world: Vec<Vec3> = match a.frame {
        FrameArg::World => input.clone(),
        FrameArg::Hip => input.iter().map(|p| Vec3::new(p.x, p.y, p.z + a.hip_height)).collect(),
    };

    let (robot_name, robot) = match a.robot {
        RobotArg::Sws => ("sws", RobotModel::MobileManipulator(mobile_manipulator())),
        RobotArg::FixedDualArm => ("fixed_dual_arm", RobotModel::FixedDualArm(fixed_dual_arm(opts.base))),
    };
    let report = coverage(&robot, &world, &opts.reach)?;
    let optimized = match (&robot, a.optimize_base) {
        (RobotModel::FixedDualArm(r), true) => Some(optimize_base(r, &world, &opts.reach, &opts.search)?),
        _ => None,
    };

    let summary = |r: &crate::reachability::ReachabilityReport| {
        json!({
            "total": r.total,
            "reachable": r.reachable,
            "fraction": r.fraction,
            "base_pose": r.base_pose,
            "base_to_centroid": r.base_to_centroid,
        })
    };
    let mut doc = json!({
        "robot": robot_name,
        "frame": match a.frame { FrameArg::World => "world", FrameArg::Hip => "hip" },
        "tolerance": opts.reach.tolerance,
        "ik_restarts": opts.reach.ik_restarts,
        "seed": opts.reach.seed,
        "coverage": summary(&report),
    });
    if let Some(o) = &optimized {
        doc["optimized"] = summary(&o.optimized);
        doc["optimizer_evaluations"] = json!(o.evaluations);
    }

    let mut csv = String::from(if optimized.is_some() { "x,y,z,reachable,reachable_optimized\n" } else { "x,y,z,reachable\n" });
    for (i, p) in input.iter().enumerate() {
        let _ = write!(csv, "{},{},{},{}", fixed6(p.x), fixed6(p.y), fixed6(p.z), report.flags[i]);
        if let Some(o) = &optimized {
            let _ = write!(csv, ",{}", o.optimized.flags[i]);
        }
        csv.push('\n');
    }

    let points = a.points.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    if points == a.out {
        return Err(Error::validation("points", "must differ from the report path").into());
    }
    let json_text = render_json(&doc);
    write_outputs(&[(&a.out, &json_text), (&points, &csv)])?;
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formatting() {
        assert_eq!(fixed6(-0.0000001), "0.000000");
        assert_eq!(fixed6(-0.0), "0.000000");
        assert_eq!(fixed6(-0.5), "-0.500000");
        assert_eq!(fixed6(1.0), "1.000000");
    }

    #[test]
    fn json_rendering() {
        let v = json!({"a": 1, "b": [0.5, -0.0], "c": {"d": "x\"y", "e": null}, "f": []});
        assert_eq!(
            render_json(&v),
            "{\n  \"a\": 1,\n  \"b\": [0.500000, 0.000000],\n  \"c\": {\n    \"d\": \"x\\\"y\",\n    \"e\": null\n  },\n  \"f\": []\n}\n"
        );
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["repcoach", "frobnicate"]), 2);
        assert_eq!(run(["repcoach", "targets", "--exercise", "x"]), 2);
        assert_eq!(run(["repcoach", "--help"]), 0);
    }
}
