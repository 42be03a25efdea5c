//! Command-line front end: `simulate`, `tune`, `compare` and `fis-surface`.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 invalid configuration or
//! arguments, 3 simulation failure, 4 optimisation failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::controller::{AdaptationMode, Gains};
use crate::fuzzy::RuleBase;
use crate::pso::{history_csv, tune_gains, GainsReport, PsoError, TuningConfig};
use crate::simulation::{fmt_f64, metrics, Metrics, SimConfig, SimLog, Simulation};
use crate::svg::{self, Line, Panel};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("optimisation failed: {0}")]
    Optimization(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Output(_) => 1,
            Self::Config(_) => 2,
            Self::Simulation(_) => 3,
            Self::Optimization(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rovtrack", version, about = "Underwater vehicle trajectory tracking workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write log.csv and metrics.json.
    Simulate(SimulateArgs),
    /// Tune k1 and k2 with a particle swarm.
    Tune(TuneArgs),
    /// Run one scenario under several adaptation modes.
    Compare(CompareArgs),
    /// Sample a fuzzy rule base over an input range.
    FisSurface(FisArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario document; the built-in straight-line scenario when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Tuning document; swarm and scenario defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated adaptation modes.
    #[arg(long, default_value = "baseline,constant,fuzzy")]
    pub controllers: String,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FisArgs {
    /// Rule-base document; overrides --rulebase.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in rule base: translational or rotational.
    #[arg(long, default_value = "translational")]
    pub rulebase: String,
    /// Input sweep as LO:STEP:HI.
    #[arg(long, default_value = "0:0.01:8")]
    pub sweep: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn write(out: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = out.join(name);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(&path, content).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<(SimConfig, Simulation), CliError> {
    let mut cfg = match path {
        Some(p) => SimConfig::from_path(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let sim = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, sim))
}

fn column(log: &SimLog, f: impl Fn(&crate::simulation::LogRow) -> f64) -> Vec<f64> {
    log.rows.iter().map(f).collect()
}

/// Pose, estimate and path plots for one run.
pub fn plots(log: &SimLog, title: &str) -> Vec<(String, String)> {
    const DOF: [&str; 6] = ["X [m]", "Y [m]", "Z [m]", "roll [rad]", "pitch [rad]", "yaw [rad]"];
    let t = column(log, |r| r.t);
    let pose: Vec<Panel> = (0..6)
        .map(|i| {
            Panel::new(
                DOF[i],
                "t [s]",
                vec![
                    Line::new("actual", t.clone(), column(log, |r| r.eta[i])),
                    Line::new("reference", t.clone(), column(log, |r| r.eta_d[i])).dashed(),
                ],
            )
        })
        .collect();
    let estimate: Vec<Panel> = (0..6)
        .map(|i| {
            Panel::new(
                &format!("disturbance {}", i + 1),
                "t [s]",
                vec![
                    Line::new("estimate", t.clone(), column(log, |r| r.tau_hat[i])),
                    Line::new("true", t.clone(), column(log, |r| r.tau_d[i])).dashed(),
                ],
            )
        })
        .collect();
    let mut xy = Panel::new(
        "XY path",
        "X [m]",
        vec![
            Line::new("actual", column(log, |r| r.eta[0]), column(log, |r| r.eta[1])),
            Line::new("reference", column(log, |r| r.eta_d[0]), column(log, |r| r.eta_d[1])).dashed(),
        ],
    );
    xy.equal_aspect = true;
    let xz = Panel::new(
        "XZ path",
        "X [m]",
        vec![
            Line::new("actual", column(log, |r| r.eta[0]), column(log, |r| r.eta[2])),
            Line::new("reference", column(log, |r| r.eta_d[0]), column(log, |r| r.eta_d[2])).dashed(),
        ],
    );
    vec![
        ("pose.svg".into(), svg::render(&format!("{title}: pose"), &pose, 3)),
        ("estimate.svg".into(), svg::render(&format!("{title}: disturbance estimate"), &estimate, 3)),
        ("path.svg".into(), svg::render(&format!("{title}: path"), &[xy, xz], 2)),
    ]
}

fn write_run(out: &Path, prefix: &str, log: &SimLog, m: &Metrics, with_svg: bool, title: &str) -> Result<(), CliError> {
    let mut csv = Vec::new();
    log.write_csv(&mut csv).map_err(|e| CliError::Output(e.to_string()))?;
    write(out, &format!("{prefix}log.csv"), std::str::from_utf8(&csv).expect("ASCII"))?;
    write(out, &format!("{prefix}metrics.json"), &to_json(m))?;
    if with_svg {
        for (name, doc) in plots(log, title) {
            write(out, &format!("{prefix}{name}"), &doc)?;
        }
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<Metrics, CliError> {
    let (_, sim) = load_scenario(args.config.as_deref(), args.seed)?;
    let log = sim.run().map_err(|e| CliError::Simulation(e.to_string()))?;
    let m = metrics(&log).map_err(|e| CliError::Simulation(e.to_string()))?;
    write_run(&args.out, "", &log, &m, args.svg, &sim.adaptation.mode.to_string())?;
    Ok(m)
}

pub fn tune(args: &TuneArgs) -> Result<GainsReport, CliError> {
    let (mut cfg, scenario) = match &args.config {
        Some(p) => TuningConfig::from_path(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => {
            let cfg = TuningConfig::default();
            let sim = cfg.scenario("defaults").map_err(|e| CliError::Config(e.to_string()))?;
            (cfg, sim)
        }
    };
    if let Some(seed) = args.seed {
        cfg.pso.seed = seed;
    }
    let sim = scenario.build().map_err(|e| CliError::Config(e.to_string()))?;
    cfg.pso.validate(12).map_err(|e| CliError::Config(e.to_string()))?;
    let (gains, result) = tune_gains(&sim, &cfg.pso).map_err(|e| match e {
        PsoError::InvalidConfig(m) => CliError::Config(m),
        other => CliError::Optimization(other.to_string()),
    })?;
    let report = GainsReport::new(&gains, &result);
    write(&args.out, "gains.json", &to_json(&report))?;
    write(&args.out, "pso_history.csv", &history_csv(&result))?;
    Ok(report)
}

/// Per-mode row of `comparison.json`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ModeSummary {
    pub mode: AdaptationMode,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_xy_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_error: Option<[f64; 6]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_estimation_error: Option<[f64; 6]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Comparison {
    pub gains: Gains,
    pub disturbance: [f64; 6],
    pub modes: Vec<ModeSummary>,
}

pub fn parse_modes(list: &str) -> Result<Vec<AdaptationMode>, CliError> {
    let mut modes = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: AdaptationMode = item.parse().map_err(CliError::Config)?;
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    if modes.len() < 2 {
        return Err(CliError::Config(format!("compare needs at least two distinct controllers, got `{list}`")));
    }
    Ok(modes)
}

/// Runs every mode; failed modes are reported in the table and turn the
/// result into a simulation error after all outputs are written.
pub fn compare(args: &CompareArgs) -> Result<Comparison, CliError> {
    let modes = parse_modes(&args.controllers)?;
    let (_, sim) = load_scenario(args.config.as_deref(), args.seed)?;
    let runs: Vec<_> = modes
        .par_iter()
        .map(|&mode| {
            let run = sim.clone().with_mode(mode).run().and_then(|log| metrics(&log).map(|m| (log, m)));
            (mode, run)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (mode, run) in &runs {
        match run {
            Ok((log, m)) => {
                write_run(&args.out, &format!("{mode}/"), log, m, args.svg, &mode.to_string())?;
                rows.push(ModeSummary {
                    mode: *mode,
                    status: "ok".into(),
                    error: None,
                    final_xy_error: Some(m.final_xy_error),
                    final_error: Some(m.final_error),
                    final_estimation_error: Some(m.final_estimation_error),
                    cost: Some(m.cost),
                });
            }
            Err(e) => {
                failures.push(format!("{mode}: {e}"));
                rows.push(ModeSummary {
                    mode: *mode,
                    status: "failed".into(),
                    error: Some(e.to_string()),
                    final_xy_error: None,
                    final_error: None,
                    final_estimation_error: None,
                    cost: None,
                });
            }
        }
    }
    let table = Comparison { gains: sim.gains, disturbance: sim.disturbance.at(0.0).0.into(), modes: rows };
    write(&args.out, "comparison.json", &to_json(&table))?;
    if failures.is_empty() {
        Ok(table)
    } else {
        Err(CliError::Simulation(failures.join("; ")))
    }
}

/// `LO:STEP:HI` into the sample points, both ends included.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Config(format!("malformed sweep `{spec}`: {m}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected LO:STEP:HI"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad(&format!("`{p}` is not a number"))))
        .collect::<Result<_, _>>()?;
    let (lo, step, hi) = (nums[0], nums[1], nums[2]);
    if !(lo.is_finite() && step.is_finite() && hi.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if hi < lo {
        return Err(bad("HI is below LO"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(bad("too many points"));
    }
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

pub fn fis_surface(args: &FisArgs) -> Result<usize, CliError> {
    let xs = parse_sweep(&args.sweep)?;
    let base = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            RuleBase::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => match args.rulebase.as_str() {
            "translational" => RuleBase::translational(),
            "rotational" => RuleBase::rotational(),
            other => return Err(CliError::Config(format!("unknown rule base `{other}`"))),
        },
    };
    let mut csv = String::from("x,gamma\n");
    for &x in &xs {
        fmt_f64(&mut csv, x);
        csv.push(',');
        fmt_f64(&mut csv, base.rate(x.abs()));
        csv.push('\n');
    }
    write(&args.out, "fis_surface.csv", &csv)?;
    Ok(xs.len())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    Ok(match &cli.command {
        Command::Simulate(a) => {
            let m = simulate(a)?;
            format!(
                "{} rows, final XY error {:.4} m, cost {:.3}, outputs in {}",
                m.rows,
                m.final_xy_error,
                m.cost,
                a.out.display()
            )
        }
        Command::Tune(a) => {
            let r = tune(a)?;
            format!("best cost {:.6}\nk1 = {}\nk2 = {}", r.cost, fmt_vec(&r.k1), fmt_vec(&r.k2))
        }
        Command::Compare(a) => {
            let c = compare(a)?;
            let mut s = String::from("mode       final XY error [m]   estimation error");
            for row in &c.modes {
                s.push_str(&format!(
                    "\n{:<10} {:>18.5}   {}",
                    row.mode.to_string(),
                    row.final_xy_error.unwrap_or(f64::NAN),
                    fmt_vec(&row.final_estimation_error.unwrap_or([f64::NAN; 6]))
                ));
            }
            s
        }
        Command::FisSurface(a) => format!("{} rows written to {}", fis_surface(a)?, a.out.join("fis_surface.csv").display()),
    })
}

/// Caps the worker pool at `ROVTRACK_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("ROVTRACK_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    match dispatch(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let xs = parse_sweep("0:0.01:8").unwrap();
        assert_eq!(xs.len(), 801);
        assert!((xs[800] - 8.0).abs() < 1e-9);
        assert_eq!(parse_sweep("2:1:2").unwrap(), vec![2.0]);
        for bad in ["8:0.01:0", "0:0:1", "0:-1:1", "0:1", "a:1:2", "0:1:inf"] {
            assert!(matches!(parse_sweep(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn mode_lists() {
        assert_eq!(parse_modes("baseline,fuzzy").unwrap(), vec![AdaptationMode::Baseline, AdaptationMode::Fuzzy]);
        assert!(parse_modes("fuzzy").is_err());
        assert!(parse_modes("fuzzy,fuzzy").is_err());
        assert!(parse_modes("fuzzy,pid").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Simulation(String::new()).exit_code(), 3);
        assert_eq!(CliError::Optimization(String::new()).exit_code(), 4);
        assert_eq!(run(["rovtrack", "frobnicate"]), 2);
    }

    #[test]
    fn plots_cover_pose_estimate_and_path() {
        let mut sim = Simulation::standard();
        sim.tf = 1.0;
        let names: Vec<String> = plots(&sim.run().unwrap(), "t").into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["pose.svg", "estimate.svg", "path.svg"]);
    }
}
