//! Backstepping tracking controller with Lyapunov-based disturbance adaptation.
//!
//! With `e = η − η_d` and `s = ė + k₁e` the control law is
//!
//! ```text
//! τ = M·J⁻¹·(η̈_d − k₁ė − k₂s − J̇ν) + (C + D)ν + g(η) − τ̂_d
//! ```
//!
//! which turns the closed loop into `η̈ = η̈_d − k₁ė − k₂s + J·M⁻¹·(τ_d − τ̂_d)`.
//! The estimate follows `τ̂̇_d = Γ·(J·M⁻¹)ᵀ·s`, which cancels the cross term of
//! `V = ½sᵀs + ½τ̃ᵀΓ⁻¹τ̃` and leaves `V̇ = −sᵀk₂s`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    inverse_kinematic_transform, kinematic_transform, transform_rate, BodyVelocity, DynamicsError, Mat6, Pose,
    Vec6, Vehicle, Wrench,
};
use crate::fuzzy::RuleBase;

/// Diagonal controller gains `k₁` (sliding surface) and `k₂` (surface decay).
///
/// Unknown fields are ignored on load so a tuner report can be read directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub k1: [f64; 6],
    pub k2: [f64; 6],
}

impl Gains {
    /// Gains found by the reference 100×100 swarm run; the default everywhere.
    pub const TUNED: Gains = Gains {
        k1: [10.0, 1.0, 5.9, 1.7, 5.8, 0.8],
        k2: [5.2, 10.0, 1.0, 5.8, 1.9, 5.5],
    };

    /// `[k1_1..k1_6, k2_1..k2_6]`, the layout used by the gain tuner.
    pub fn from_slice(x: &[f64]) -> Self {
        assert_eq!(x.len(), 12, "gain vector has 12 entries");
        let mut g = Gains { k1: [0.0; 6], k2: [0.0; 6] };
        g.k1.copy_from_slice(&x[..6]);
        g.k2.copy_from_slice(&x[6..]);
        g
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.k1.iter().chain(&self.k2).copied().collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, k) in [("k1", &self.k1), ("k2", &self.k2)] {
            if let Some((i, v)) = k.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(format!("{name}[{i}] must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self::TUNED
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptationMode {
    /// Estimate frozen at zero.
    Baseline,
    /// Fixed rates Γ.
    Constant,
    /// Rates scheduled per DOF by the fuzzy rule bases.
    #[default]
    Fuzzy,
    /// The controller is handed the true disturbance (diagnostic only).
    Oracle,
}

impl std::fmt::Display for AdaptationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Baseline => "baseline",
            Self::Constant => "constant",
            Self::Fuzzy => "fuzzy",
            Self::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for AdaptationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "baseline" => Ok(Self::Baseline),
            "constant" => Ok(Self::Constant),
            "fuzzy" => Ok(Self::Fuzzy),
            "oracle" => Ok(Self::Oracle),
            other => Err(format!("unknown controller mode `{other}`")),
        }
    }
}

/// Which signal feeds the fuzzy antecedents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisInput {
    /// `|(J·M⁻¹)ᵀs|`, the same vector that drives the estimate.
    #[default]
    Transposed,
    /// `|J·M⁻¹·s|`.
    Direct,
}

/// Adaptation settings. The disturbance-rate bound of the low-frequency
/// assumption enters no computation and is not stored.
#[derive(Debug, Clone)]
pub struct AdaptationConfig {
    pub mode: AdaptationMode,
    /// Constant-mode rates.
    pub gamma: [f64; 6],
    /// Fuzzy rule base for surge, sway and heave.
    pub translational: RuleBase,
    /// Fuzzy rule base for roll, pitch and yaw.
    pub rotational: RuleBase,
    /// Estimate bound per DOF; 0 leaves that DOF unclamped.
    pub d_max: [f64; 6],
    pub fis_input: FisInput,
}

impl AdaptationConfig {
    pub const DEFAULT_D_MAX: [f64; 6] = [10.0, 10.0, 10.0, 2.0, 2.0, 2.0];

    pub fn new(mode: AdaptationMode) -> Self {
        let (translational, rotational) = crate::fuzzy::default_rulebases();
        Self {
            mode,
            gamma: [20.0, 20.0, 20.0, 0.2, 0.2, 0.2],
            translational,
            rotational,
            d_max: Self::DEFAULT_D_MAX,
            fis_input: FisInput::default(),
        }
    }

    pub fn constant(gamma: [f64; 6]) -> Self {
        Self { gamma, ..Self::new(AdaptationMode::Constant) }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.mode == AdaptationMode::Constant {
            if let Some((i, v)) = self.gamma.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(format!("gamma[{i}] must be positive in constant mode, got {v}"));
            }
        }
        if let Some((i, v)) = self.d_max.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(format!("d_max[{i}] must be non-negative, got {v}"));
        }
        Ok(())
    }
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self::new(AdaptationMode::Fuzzy)
    }
}

/// Desired pose with its first two time derivatives, global frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReferencePoint {
    pub pose: Vec6,
    pub velocity: Vec6,
    pub acceleration: Vec6,
}

impl ReferencePoint {
    pub fn hold(pose: Vec6) -> Self {
        Self { pose, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControllerState {
    pub tau_hat: Wrench,
    pub last_s: Vec6,
    pub last_gamma: Vec6,
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn error_pair(eta: &Pose, eta_dot: &Vec6, reference: &ReferencePoint) -> (Vec6, Vec6) {
    let mut e = eta.0 - reference.pose;
    e[5] = wrap_angle(e[5]);
    (e, eta_dot - reference.velocity)
}

/// `(e, ė)` with `ė = J(η)ν − η̇_d`; the yaw error is wrapped.
pub fn tracking_error(
    eta: &Pose,
    nu: &BodyVelocity,
    reference: &ReferencePoint,
) -> Result<(Vec6, Vec6), DynamicsError> {
    let j = kinematic_transform(eta)?;
    Ok(error_pair(eta, &(j * nu.0), reference))
}

/// `s = ė + k₁e`.
pub fn sliding_surface(e: &Vec6, e_dot: &Vec6, k1: &[f64; 6]) -> Vec6 {
    e_dot + Vec6::from(*k1).component_mul(e)
}

pub fn control_wrench(
    vehicle: &Vehicle,
    eta: &Pose,
    nu: &BodyVelocity,
    reference: &ReferencePoint,
    gains: &Gains,
    tau_hat: &Wrench,
) -> Result<Wrench, DynamicsError> {
    let terms = LoopTerms::new(vehicle, eta, nu, reference, gains)?;
    Ok(terms.wrench(tau_hat))
}

/// `b = (J·M⁻¹)ᵀs = M⁻¹Jᵀs`.
pub fn adaptation_drive(vehicle: &Vehicle, eta: &Pose, s: &Vec6) -> Result<Vec6, DynamicsError> {
    let j = kinematic_transform(eta)?;
    Ok(vehicle.mass_inv() * (j.transpose() * s))
}

/// Per-DOF adaptation rates for antecedent signal `x` (`b` by default).
pub fn adaptation_rates(cfg: &AdaptationConfig, x: &Vec6) -> Vec6 {
    match cfg.mode {
        AdaptationMode::Baseline | AdaptationMode::Oracle => Vec6::zeros(),
        AdaptationMode::Constant => Vec6::from(cfg.gamma),
        AdaptationMode::Fuzzy => Vec6::from_fn(|i, _| {
            let base = if i < 3 { &cfg.translational } else { &cfg.rotational };
            base.rate(x[i].abs())
        }),
    }
}

/// `τ̂̇ = Γ·b`, with the derivative zeroed where a clamped component sits on
/// its bound and would move outward.
pub fn adaptation_derivative(gamma: &Vec6, b: &Vec6, tau_hat: &Wrench, d_max: &[f64; 6]) -> Vec6 {
    Vec6::from_fn(|i, _| {
        let rate = gamma[i] * b[i];
        let bound = d_max[i];
        if bound > 0.0 && ((tau_hat.0[i] >= bound && rate > 0.0) || (tau_hat.0[i] <= -bound && rate < 0.0)) {
            0.0
        } else {
            rate
        }
    })
}

/// Kinematic quantities shared by the control law and the adaptation law at
/// one state.
#[derive(Debug, Clone)]
pub struct LoopTerms {
    pub j: Mat6,
    pub e: Vec6,
    pub e_dot: Vec6,
    pub s: Vec6,
    /// `M·J⁻¹·(η̈_d − k₁ė − k₂s − J̇ν) + (C + D)ν + g(η)`.
    feedforward: Vec6,
    mass_inv: Mat6,
}

impl LoopTerms {
    pub fn new(
        vehicle: &Vehicle,
        eta: &Pose,
        nu: &BodyVelocity,
        reference: &ReferencePoint,
        gains: &Gains,
    ) -> Result<Self, DynamicsError> {
        let j = kinematic_transform(eta)?;
        let j_inv = inverse_kinematic_transform(eta)?;
        let a = transform_rate(eta, nu)? * nu.0;
        let (e, e_dot) = error_pair(eta, &(j * nu.0), reference);
        let s = sliding_surface(&e, &e_dot, &gains.k1);
        let desired = reference.acceleration
            - Vec6::from(gains.k1).component_mul(&e_dot)
            - Vec6::from(gains.k2).component_mul(&s)
            - a;
        let feedforward = vehicle.mass() * (j_inv * desired) + vehicle.velocity_forces(nu) + vehicle.restoring(eta);
        Ok(Self { j, e, e_dot, s, feedforward, mass_inv: *vehicle.mass_inv() })
    }

    pub fn wrench(&self, tau_hat: &Wrench) -> Wrench {
        Wrench(self.feedforward - tau_hat.0)
    }

    pub fn drive(&self) -> Vec6 {
        self.mass_inv * (self.j.transpose() * self.s)
    }

    /// Signal seen by the fuzzy antecedents.
    pub fn fis_signal(&self, input: FisInput) -> Vec6 {
        match input {
            FisInput::Transposed => self.drive(),
            FisInput::Direct => self.j * (self.mass_inv * self.s),
        }
    }
}
