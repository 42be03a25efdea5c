use serde::{Deserialize, Serialize};

use super::DynamicsError;

const BLUEROV2_HEAVY: &str = include_str!("../../data/bluerov2_heavy.json");

/// Physical constants of a rigid underwater vehicle.
///
/// Hydrodynamic coefficients are stored as non-negative magnitudes; the sign
/// conventions live in the matrix builders. JSON keys follow the usual
/// hydrodynamic symbol names (`m`, `Ix`, `d_lin`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Mass (kg).
    #[serde(rename = "m")]
    pub mass: f64,
    /// Displaced volume (m³).
    pub volume: f64,
    #[serde(rename = "Ix")]
    pub ix: f64,
    #[serde(rename = "Iy")]
    pub iy: f64,
    #[serde(rename = "Iz")]
    pub iz: f64,
    #[serde(rename = "Ixy", default)]
    pub ixy: f64,
    #[serde(rename = "Iyz", default)]
    pub iyz: f64,
    #[serde(rename = "Izx", default)]
    pub izx: f64,
    /// Center of gravity in the body frame (m).
    pub cog: [f64; 3],
    /// Center of buoyancy in the body frame (m).
    pub cob: [f64; 3],
    /// Added mass X_u̇, Y_v̇, Z_ẇ, K_ṗ, M_q̇, N_ṙ.
    pub added_mass: [f64; 6],
    /// Linear damping X_u ... N_r.
    pub d_lin: [f64; 6],
    /// Quadratic damping X_u|u| ... N_r|r|.
    pub d_quad: [f64; 6],
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_g0")]
    pub g0: f64,
}

fn default_rho() -> f64 {
    1000.0
}

fn default_g0() -> f64 {
    9.81
}

impl VehicleParams {
    /// BlueROV2 Heavy parameter set shipped in `data/bluerov2_heavy.json`.
    pub fn bluerov2_heavy() -> Self {
        Self::from_json(BLUEROV2_HEAVY).expect("bundled vehicle parameters are valid")
    }

    pub fn from_json(text: &str) -> Result<Self, DynamicsError> {
        let params: Self =
            serde_json::from_str(text).map_err(|e| DynamicsError::InvalidParams(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    /// Weight W = m·g₀ (N).
    pub fn weight(&self) -> f64 {
        self.mass * self.g0
    }

    /// Buoyancy B = ρ·g₀·∇ (N).
    pub fn buoyancy(&self) -> f64 {
        self.rho * self.g0 * self.volume
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("m", self.mass),
            ("volume", self.volume),
            ("Ix", self.ix),
            ("Iy", self.iy),
            ("Iz", self.iz),
            ("rho", self.rho),
            ("g0", self.g0),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        let non_negative = [
            ("added_mass", &self.added_mass),
            ("d_lin", &self.d_lin),
            ("d_quad", &self.d_quad),
        ];
        for (name, values) in non_negative {
            if let Some((i, v)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name}[{i}] must be non-negative, got {v}"
                )));
            }
        }
        let finite = self
            .cog
            .iter()
            .chain(&self.cob)
            .chain([&self.ixy, &self.iyz, &self.izx])
            .all(|v| v.is_finite());
        if !finite {
            return Err(DynamicsError::InvalidParams(
                "cog, cob and inertia products must be finite".into(),
            ));
        }
        Ok(())
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::bluerov2_heavy()
    }
}
