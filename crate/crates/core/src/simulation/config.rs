//! JSON scenario documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::controller::{AdaptationConfig, AdaptationMode, FisInput, Gains};
use crate::dynamics::{kinematic_transform, Pose, Vec6, Vehicle, VehicleParams};
use crate::fuzzy::RuleBaseSpec;

use super::{DisturbanceModel, Simulation, State, Trajectory};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}: line {line}, column {column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), message: message.into() }
    }

    pub fn parse(origin: &str, err: &serde_json::Error) -> Self {
        Self::Parse { origin: origin.into(), line: err.line(), column: err.column(), message: err.to_string() }
    }
}

/// Vehicle parameters by builtin name, file path, or inline object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VehicleSource {
    Builtin(String),
    File { path: PathBuf },
    Inline(Box<VehicleParams>),
}

impl Default for VehicleSource {
    fn default() -> Self {
        Self::Builtin("bluerov2_heavy".into())
    }
}

impl VehicleSource {
    pub fn load(&self) -> Result<VehicleParams, ConfigError> {
        match self {
            Self::Builtin(name) if name == "bluerov2_heavy" => Ok(VehicleParams::bluerov2_heavy()),
            Self::Builtin(name) => Err(ConfigError::invalid("vehicle", format!("unknown builtin vehicle `{name}`"))),
            Self::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                serde_json::from_str(&text).map_err(|e| ConfigError::parse(&path.display().to_string(), &e))
            }
            Self::Inline(p) => Ok((**p).clone()),
        }
    }
}

/// Gains inline or from a JSON file such as a tuner's `gains.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainsSource {
    File(PathBuf),
    Inline(Gains),
}

impl Default for GainsSource {
    fn default() -> Self {
        Self::Inline(Gains::TUNED)
    }
}

impl GainsSource {
    pub fn load(&self) -> Result<Gains, ConfigError> {
        match self {
            Self::Inline(g) => Ok(*g),
            Self::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                serde_json::from_str(&text).map_err(|e| ConfigError::parse(&path.display().to_string(), &e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptationSpec {
    #[serde(default)]
    pub mode: AdaptationMode,
    #[serde(default = "default_gamma")]
    pub gamma: [f64; 6],
    #[serde(default = "default_d_max")]
    pub d_max: [f64; 6],
    #[serde(default)]
    pub fis_input: FisInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translational: Option<RuleBaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotational: Option<RuleBaseSpec>,
}

fn default_gamma() -> [f64; 6] {
    [20.0, 20.0, 20.0, 0.2, 0.2, 0.2]
}
fn default_d_max() -> [f64; 6] {
    AdaptationConfig::DEFAULT_D_MAX
}

impl Default for AdaptationSpec {
    fn default() -> Self {
        Self {
            mode: AdaptationMode::Fuzzy,
            gamma: default_gamma(),
            d_max: default_d_max(),
            fis_input: FisInput::default(),
            translational: None,
            rotational: None,
        }
    }
}

impl AdaptationSpec {
    pub fn build(&self) -> Result<AdaptationConfig, ConfigError> {
        let mut cfg = AdaptationConfig::new(self.mode);
        cfg.gamma = self.gamma;
        cfg.d_max = self.d_max;
        cfg.fis_input = self.fis_input;
        if let Some(spec) = &self.translational {
            cfg.translational = spec.build().map_err(|e| ConfigError::invalid("adaptation.translational", e.to_string()))?;
        }
        if let Some(spec) = &self.rotational {
            cfg.rotational = spec.build().map_err(|e| ConfigError::invalid("adaptation.rotational", e.to_string()))?;
        }
        cfg.validate().map_err(|m| ConfigError::invalid("adaptation", m))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_tf")]
    pub tf: f64,
    /// Controller update period; absent means the controller runs inside
    /// every integration stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoh: Option<f64>,
}

fn default_dt() -> f64 {
    0.01
}
fn default_tf() -> f64 {
    60.0
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { dt: default_dt(), tf: default_tf(), zoh: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(rename = "Q", default = "ones")]
    pub q: [f64; 6],
    #[serde(rename = "R", default = "ones")]
    pub r: [f64; 6],
}

fn ones() -> [f64; 6] {
    [1.0; 6]
}

impl Default for CostSpec {
    fn default() -> Self {
        Self { q: ones(), r: ones() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub eta: [f64; 6],
    #[serde(default)]
    pub nu: [f64; 6],
}

/// Scenario document. Every section is optional; the defaults describe the
/// straight-line transit under the standard disturbance with fuzzy
/// adaptation over 60 s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub vehicle: VehicleSource,
    #[serde(default)]
    pub trajectory: Trajectory,
    #[serde(default)]
    pub disturbance: DisturbanceModel,
    #[serde(default)]
    pub gains: GainsSource,
    #[serde(default)]
    pub adaptation: AdaptationSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial: InitialSpec,
}

/// Applies an RFC 7386 merge patch in place.
pub fn merge_patch(target: &mut Value, patch: &Value) {
    json_patch::merge(target, patch);
}

impl SimConfig {
    /// 8 m square at 0.2 m/s over 200 s.
    pub fn square_mission() -> Self {
        Self {
            trajectory: Trajectory::square(8.0, 0.2),
            integrator: IntegratorSpec { tf: 200.0, ..IntegratorSpec::default() },
            ..Self::default()
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::parse(origin, &e))
    }

    /// Reads a document; a relative vehicle file path is taken relative to
    /// the document's directory.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes relative vehicle and gains file paths relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        if let VehicleSource::File { path } = &mut self.vehicle {
            if path.is_relative() {
                *path = dir.join(&path);
            }
        }
        if let GainsSource::File(path) = &mut self.gains {
            if path.is_relative() {
                *path = dir.join(&path);
            }
        }
    }

    /// Default document with `patch` merged over it.
    pub fn from_patch(patch: &Value, origin: &str) -> Result<Self, ConfigError> {
        let mut doc = serde_json::to_value(Self::default()).expect("config serializes");
        merge_patch(&mut doc, patch);
        serde_json::from_value(doc).map_err(|e| ConfigError::Parse {
            origin: origin.into(),
            line: 0,
            column: 0,
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every section and assembles the runnable scenario.
    pub fn build(&self) -> Result<Simulation, ConfigError> {
        let vehicle = Vehicle::new(self.vehicle.load()?).map_err(|e| ConfigError::invalid("vehicle", e.to_string()))?;
        self.trajectory.validate().map_err(|m| ConfigError::invalid("trajectory", m))?;
        let gains = self.gains.load()?;
        gains.validate().map_err(|m| ConfigError::invalid("gains", m))?;
        let adaptation = self.adaptation.build()?;
        self.disturbance.validate(&adaptation.d_max).map_err(|m| ConfigError::invalid("disturbance", m))?;

        let IntegratorSpec { dt, tf, zoh } = self.integrator;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ConfigError::invalid("integrator.dt", format!("must be positive, got {dt}")));
        }
        if !(tf.is_finite() && tf >= 0.0) {
            return Err(ConfigError::invalid("integrator.tf", format!("must be non-negative, got {tf}")));
        }
        if let Some(p) = zoh {
            let ratio = p / dt;
            if !(p.is_finite() && ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() < 1e-6) {
                return Err(ConfigError::invalid("integrator.zoh", format!("must be a positive multiple of dt, got {p}")));
            }
        }
        for (name, w) in [("cost.Q", &self.cost.q), ("cost.R", &self.cost.r)] {
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(ConfigError::invalid(name, "weights must be non-negative"));
            }
        }
        let eta = Vec6::from(self.initial.eta);
        let nu = Vec6::from(self.initial.nu);
        if !(eta.iter().chain(nu.iter()).all(|v| v.is_finite())) {
            return Err(ConfigError::invalid("initial", "entries must be finite"));
        }
        kinematic_transform(&Pose(eta)).map_err(|e| ConfigError::invalid("initial.eta", e.to_string()))?;

        Ok(Simulation {
            vehicle,
            trajectory: self.trajectory.clone(),
            disturbance: self.disturbance.clone(),
            gains,
            adaptation,
            dt,
            tf,
            zoh,
            q: self.cost.q,
            r: self.cost.r,
            initial: State { eta, nu, tau_hat: Vec6::zeros() },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_document_is_the_default() {
        let cfg = SimConfig::from_json("{}", "test").unwrap();
        assert_eq!(cfg, SimConfig::default());
        let sim = cfg.build().unwrap();
        assert_eq!((sim.dt, sim.tf), (0.01, 60.0));
        assert_eq!(sim.adaptation.mode, AdaptationMode::Fuzzy);
        assert_eq!(sim.gains, Gains::TUNED);
    }

    #[test]
    fn gains_from_a_report_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("gains.json"),
            r#"{"k1": [1, 2, 3, 4, 5, 6], "k2": [6, 5, 4, 3, 2, 1], "cost": 12.5, "iterations": 100}"#,
        )
        .unwrap();
        std::fs::write(dir.path().join("cfg.json"), r#"{"gains": "gains.json"}"#).unwrap();
        let sim = SimConfig::from_path(&dir.path().join("cfg.json")).unwrap().build().unwrap();
        assert_eq!(sim.gains.k1, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn default_round_trips_through_json() {
        for cfg in [SimConfig::default(), SimConfig::square_mission()] {
            assert_eq!(SimConfig::from_json(&cfg.to_json(), "rt").unwrap(), cfg);
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = SimConfig::from_json("{\n  \"integrator\": {\"dt\": \"fast\"}\n}", "cfg.json").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SimConfig::from_json(r#"{"integrater": {}}"#, "x").is_err());
    }

    #[test]
    fn invalid_fields_are_named() {
        let cases = [
            (json!({"integrator": {"dt": 0.0}}), "integrator.dt"),
            (json!({"integrator": {"zoh": 0.015}}), "integrator.zoh"),
            (json!({"gains": {"k1": [1, 1, 1, 1, 1, -1], "k2": [1, 1, 1, 1, 1, 1]}}), "gains"),
            (json!({"disturbance": {"constant": [50, 0, 0, 0, 0, 0]}}), "disturbance"),
            (json!({"cost": {"Q": [1, 1, 1, 1, 1, -1]}}), "cost.Q"),
            (json!({"vehicle": "submarine"}), "vehicle"),
            (json!({"initial": {"eta": [0, 0, 0, 0, 1.58, 0]}}), "initial.eta"),
            (json!({"adaptation": {"mode": "constant", "gamma": [0, 1, 1, 1, 1, 1]}}), "adaptation"),
        ];
        for (patch, field) in cases {
            let err = SimConfig::from_patch(&patch, "p").unwrap().build().unwrap_err();
            assert!(matches!(&err, ConfigError::Invalid { field: f, .. } if f == field), "{patch}: {err}");
        }
    }

    #[test]
    fn merge_patch_overrides_leaves_only() {
        let cfg = SimConfig::from_patch(&json!({"integrator": {"tf": 20}, "adaptation": {"mode": "constant"}}), "p")
            .unwrap();
        assert_eq!(cfg.integrator.tf, 20.0);
        assert_eq!(cfg.integrator.dt, 0.01);
        assert_eq!(cfg.adaptation.mode, AdaptationMode::Constant);
        assert_eq!(cfg.adaptation.d_max, AdaptationConfig::DEFAULT_D_MAX);
    }

    #[test]
    fn vehicle_sources() {
        let dir = tempfile::tempdir().unwrap();
        let params = serde_json::to_string(&VehicleParams::bluerov2_heavy()).unwrap();
        std::fs::write(dir.path().join("rov.json"), &params).unwrap();
        std::fs::write(dir.path().join("cfg.json"), r#"{"vehicle": {"path": "rov.json"}}"#).unwrap();
        let cfg = SimConfig::from_path(&dir.path().join("cfg.json")).unwrap();
        assert_eq!(cfg.vehicle.load().unwrap(), VehicleParams::bluerov2_heavy());
        let inline: SimConfig = serde_json::from_str(&format!(r#"{{"vehicle": {params}}}"#)).unwrap();
        assert!(matches!(inline.vehicle, VehicleSource::Inline(_)));
        assert!(inline.build().is_ok());
        assert!(matches!(
            SimConfig::from_path(&dir.path().join("missing.json")),
            Err(ConfigError::Io { .. })
        ));
    }
}
