//! Particle swarm optimisation and the controller gain tuner built on it.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::controller::Gains;
use crate::simulation::{fmt_f64, ConfigError, SimConfig, Simulation};

#[derive(Debug, Error, PartialEq)]
pub enum PsoError {
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
    #[error("every particle of the initial swarm failed to evaluate")]
    AllCandidatesFailed,
}

/// Search box: one `[lo, hi]` for every dimension or one per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bounds {
    Uniform([f64; 2]),
    PerDimension(Vec<[f64; 2]>),
}

impl Bounds {
    fn resolve(&self, dim: usize) -> Result<Vec<(f64, f64)>, PsoError> {
        let b: Vec<(f64, f64)> = match self {
            Self::Uniform([lo, hi]) => vec![(*lo, *hi); dim],
            Self::PerDimension(v) if v.len() == dim => v.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
            Self::PerDimension(v) => {
                return Err(PsoError::InvalidConfig(format!("{} bounds given for {dim} dimensions", v.len())))
            }
        };
        if let Some((i, (lo, hi))) = b.iter().enumerate().find(|(_, (lo, hi))| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(PsoError::InvalidConfig(format!("bounds[{i}] = [{lo}, {hi}] is not an interval")));
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_n")]
    pub iters: usize,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_c")]
    pub c1: f64,
    #[serde(default = "default_c")]
    pub c2: f64,
    #[serde(default = "default_bounds")]
    pub bounds: Bounds,
    /// Velocity limit as a fraction of each dimension's range.
    #[serde(default = "default_vclamp")]
    pub vclamp: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    100
}
fn default_w() -> f64 {
    0.729
}
fn default_c() -> f64 {
    1.49445
}
fn default_bounds() -> Bounds {
    Bounds::Uniform([0.1, 10.0])
}
fn default_vclamp() -> f64 {
    0.2
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            iters: default_n(),
            w: default_w(),
            c1: default_c(),
            c2: default_c(),
            bounds: default_bounds(),
            vclamp: default_vclamp(),
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self, dim: usize) -> Result<Vec<(f64, f64)>, PsoError> {
        let bad = |m: String| Err(PsoError::InvalidConfig(m));
        if dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.n == 0 || self.iters == 0 {
            return bad(format!("swarm size and iteration count must be at least 1 (n = {}, iters = {})", self.n, self.iters));
        }
        if !(0.0..1.0).contains(&self.w) {
            return bad(format!("inertia w must lie in [0, 1), got {}", self.w));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return bad(format!("c1 and c2 must be non-negative, got {} and {}", self.c1, self.c2));
        }
        if !(self.vclamp > 0.0 && self.vclamp.is_finite()) {
            return bad(format!("vclamp must be positive, got {}", self.vclamp));
        }
        self.bounds.resolve(dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    /// Global best cost after each iteration.
    pub history: Vec<f64>,
    /// Global best position after each iteration.
    pub position_history: Vec<Vec<f64>>,
    pub evaluations: usize,
}

fn evaluate<F>(objective: &F, positions: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    positions
        .par_iter()
        .map(|x| {
            let c = objective(x);
            if c.is_finite() {
                c
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Minimises `objective` over the box in `cfg`. Evaluations within an
/// iteration run in parallel; all random draws are made up front so the
/// result does not depend on scheduling.
pub fn pso_minimize<F>(objective: F, dim: usize, cfg: &PsoConfig) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let bounds = cfg.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vmax: Vec<f64> = bounds.iter().map(|(lo, hi)| cfg.vclamp * (hi - lo)).collect();

    let positions: Vec<Vec<f64>> =
        (0..cfg.n).map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()).collect();
    let costs = evaluate(&objective, &positions);
    if costs.iter().all(|c| c.is_infinite()) {
        return Err(PsoError::AllCandidatesFailed);
    }
    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(&costs)
        .map(|(x, &c)| Particle { velocity: vec![0.0; dim], best_position: x.clone(), position: x, best_cost: c })
        .collect();
    let mut g = 0;
    for (i, p) in swarm.iter().enumerate() {
        if p.best_cost < swarm[g].best_cost {
            g = i;
        }
    }
    let mut best_position = swarm[g].best_position.clone();
    let mut best_cost = swarm[g].best_cost;
    let mut evaluations = cfg.n;
    let mut history = Vec::with_capacity(cfg.iters);
    let mut position_history = Vec::with_capacity(cfg.iters);

    for _ in 0..cfg.iters {
        let draws: Vec<f64> = (0..cfg.n * dim * 2).map(|_| rng.random::<f64>()).collect();
        for (i, p) in swarm.iter_mut().enumerate() {
            let r = &draws[i * dim * 2..(i + 1) * dim * 2];
            for d in 0..dim {
                let v = cfg.w * p.velocity[d]
                    + cfg.c1 * r[2 * d] * (p.best_position[d] - p.position[d])
                    + cfg.c2 * r[2 * d + 1] * (best_position[d] - p.position[d]);
                p.velocity[d] = v.clamp(-vmax[d], vmax[d]);
                p.position[d] = (p.position[d] + p.velocity[d]).clamp(bounds[d].0, bounds[d].1);
            }
        }
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        let costs = evaluate(&objective, &positions);
        evaluations += cfg.n;
        for (p, &c) in swarm.iter_mut().zip(&costs) {
            if c < p.best_cost {
                p.best_cost = c;
                p.best_position.clone_from(&p.position);
            }
        }
        for p in &swarm {
            if p.best_cost < best_cost {
                best_cost = p.best_cost;
                best_position.clone_from(&p.best_position);
            }
        }
        history.push(best_cost);
        position_history.push(best_position.clone());
    }

    Ok(PsoResult { best_position, best_cost, history, position_history, evaluations })
}

/// Tunes `[k1, k2]` by minimising the scenario's running cost. Candidates
/// whose simulation fails score `+∞`.
pub fn tune_gains(sim: &Simulation, cfg: &PsoConfig) -> Result<(Gains, PsoResult), PsoError> {
    let objective = |x: &[f64]| sim.clone().with_gains(Gains::from_slice(x)).run_cost().unwrap_or(f64::INFINITY);
    let result = pso_minimize(objective, 12, cfg)?;
    Ok((Gains::from_slice(&result.best_position), result))
}

/// Content written to `gains.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsReport {
    pub k1: [f64; 6],
    pub k2: [f64; 6],
    pub cost: f64,
    pub iterations: usize,
}

impl GainsReport {
    pub fn new(gains: &Gains, result: &PsoResult) -> Self {
        Self { k1: gains.k1, k2: gains.k2, cost: result.best_cost, iterations: result.history.len() }
    }

    pub fn gains(&self) -> Gains {
        Gains { k1: self.k1, k2: self.k2 }
    }
}

/// `iter,best_cost,k1_1..k2_6`, one row per iteration, counting from 1.
pub fn history_csv(result: &PsoResult) -> String {
    let mut out = String::from("iter,best_cost");
    for name in ["k1", "k2"] {
        for i in 1..=6 {
            write!(out, ",{name}_{i}").unwrap();
        }
    }
    out.push('\n');
    for (i, (c, x)) in result.history.iter().zip(&result.position_history).enumerate() {
        write!(out, "{}", i + 1).unwrap();
        for v in std::iter::once(c).chain(x) {
            out.push(',');
            fmt_f64(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

/// Tuning document: swarm settings plus a merge patch over the default
/// scenario shortened to 20 s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    #[serde(default)]
    pub pso: PsoConfig,
    #[serde(default)]
    pub sim: Value,
}

/// Scenario horizon used while tuning (s).
pub const TUNING_HORIZON: f64 = 20.0;

impl TuningConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::parse(origin, &e))
    }

    pub fn from_path(path: &Path) -> Result<(Self, SimConfig), ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let origin = path.display().to_string();
        let cfg = Self::from_json(&text, &origin)?;
        let mut sim = cfg.scenario(&origin)?;
        sim.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok((cfg, sim))
    }

    /// The scenario every candidate is scored on.
    pub fn scenario(&self, origin: &str) -> Result<SimConfig, ConfigError> {
        let mut base = SimConfig::default();
        base.integrator.tf = TUNING_HORIZON;
        let mut doc = serde_json::to_value(base).expect("config serializes");
        if !self.sim.is_null() {
            if !self.sim.is_object() {
                return Err(ConfigError::invalid("sim", "must be an object"));
            }
            crate::simulation::merge_patch(&mut doc, &self.sim);
        }
        serde_json::from_value(doc)
            .map_err(|e| ConfigError::Parse { origin: format!("{origin} (sim)"), line: 0, column: 0, message: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn small(n: usize, iters: usize) -> PsoConfig {
        PsoConfig { n, iters, bounds: Bounds::Uniform([-10.0, 10.0]), seed: 7, ..PsoConfig::default() }
    }

    #[test]
    fn sphere_converges() {
        let r = pso_minimize(sphere, 4, &small(30, 100)).unwrap();
        assert!(r.best_cost < 1e-6, "cost {}", r.best_cost);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.history.len(), 100);
    }

    #[test]
    fn frozen_swarm_keeps_its_sample() {
        let cfg = PsoConfig { n: 1, iters: 5, w: 0.0, c1: 0.0, c2: 0.0, ..small(1, 5) };
        let r = pso_minimize(sphere, 3, &cfg).unwrap();
        assert!(r.position_history.iter().all(|p| *p == r.best_position));
        assert!(r.history.iter().all(|c| *c == r.best_cost));
    }

    #[test]
    fn evaluation_count_and_bounds() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::Mutex;
        let calls = AtomicUsize::new(0);
        let outside = Mutex::new(0);
        let cfg = PsoConfig { bounds: Bounds::Uniform([0.1, 10.0]), ..small(9, 7) };
        let r = pso_minimize(
            |x| {
                calls.fetch_add(1, Ordering::Relaxed);
                if x.iter().any(|v| !(0.1..=10.0).contains(v)) {
                    *outside.lock().unwrap() += 1;
                }
                sphere(x)
            },
            12,
            &cfg,
        )
        .unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 9 * 7 + 9);
        assert_eq!(r.evaluations, 9 * 7 + 9);
        assert_eq!(*outside.lock().unwrap(), 0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = pso_minimize(sphere, 5, &small(10, 20)).unwrap();
        let b = pso_minimize(sphere, 5, &small(10, 20)).unwrap();
        assert_eq!(a, b);
        let c = pso_minimize(sphere, 5, &PsoConfig { seed: 8, ..small(10, 20) }).unwrap();
        assert_ne!(a.best_position, c.best_position);
    }

    #[test]
    fn non_finite_costs_are_infinite() {
        let r = pso_minimize(|x| if x[0] > 0.0 { f64::NAN } else { sphere(x) }, 2, &small(20, 10)).unwrap();
        assert!(r.best_cost.is_finite());
        assert_eq!(pso_minimize(|_| f64::NAN, 2, &small(5, 3)), Err(PsoError::AllCandidatesFailed));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            PsoConfig { n: 0, ..PsoConfig::default() },
            PsoConfig { iters: 0, ..PsoConfig::default() },
            PsoConfig { w: 1.0, ..PsoConfig::default() },
            PsoConfig { c1: -0.1, ..PsoConfig::default() },
            PsoConfig { bounds: Bounds::Uniform([1.0, 1.0]), ..PsoConfig::default() },
            PsoConfig { bounds: Bounds::PerDimension(vec![[0.0, 1.0]; 3]), ..PsoConfig::default() },
        ] {
            assert!(matches!(pso_minimize(sphere, 12, &cfg), Err(PsoError::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn history_csv_layout() {
        let r = pso_minimize(sphere, 12, &PsoConfig { n: 4, iters: 3, ..PsoConfig::default() }).unwrap();
        let csv = history_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("iter,best_cost,k1_1,") && lines[0].ends_with(",k2_6"));
        assert_eq!(lines[0].split(',').count(), 14);
        assert!(lines[3].starts_with("3,"));
    }

    #[test]
    fn tuning_document_defaults() {
        let t = TuningConfig::from_json(r#"{"pso": {"n": 4, "iters": 2}, "sim": {"adaptation": {"mode": "constant"}}}"#, "t")
            .unwrap();
        let sim = t.scenario("t").unwrap();
        assert_eq!(sim.integrator.tf, TUNING_HORIZON);
        assert_eq!(t.pso.w, 0.729);
        assert_eq!(t.pso.bounds, Bounds::Uniform([0.1, 10.0]));
        assert!(TuningConfig::from_json(r#"{"pso": {"swarm": 3}}"#, "t").is_err());
    }

    #[test]
    fn short_tuning_run_stays_in_bounds() {
        let mut sim = Simulation::standard();
        sim.tf = 1.0;
        let cfg = PsoConfig { n: 4, iters: 2, seed: 3, ..PsoConfig::default() };
        let (gains, result) = tune_gains(&sim, &cfg).unwrap();
        assert!(gains.to_vec().iter().all(|v| (0.1..=10.0).contains(v)));
        assert_eq!(result.history.len(), 2);
        let report = GainsReport::new(&gains, &result);
        assert_eq!(report.gains(), gains);
        assert_eq!(report.iterations, 2);
    }
}
