//! Bounded, piecewise-constant environmental disturbance.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Vec6, Wrench};

/// Constant disturbance used by the standard straight-line scenario (N, N·m).
pub const STANDARD_DISTURBANCE: [f64; 6] = [-1.0, 1.0, 2.0, 0.1, 0.1, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleStep {
    /// Switch time (s).
    pub t: f64,
    pub value: [f64; 6],
}

/// `constant` until the first schedule step, then each step's value from its
/// switch time on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceModel {
    pub constant: [f64; 6],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleStep>,
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self::constant(STANDARD_DISTURBANCE)
    }
}

impl DisturbanceModel {
    pub fn constant(value: [f64; 6]) -> Self {
        Self { constant: value, schedule: Vec::new() }
    }

    pub fn none() -> Self {
        Self::constant([0.0; 6])
    }

    pub fn at(&self, t: f64) -> Wrench {
        let v = self.schedule.iter().take_while(|s| s.t <= t).last().map_or(self.constant, |s| s.value);
        Wrench(Vec6::from(v))
    }

    /// Checks ordering and finiteness, and that every value stays inside the
    /// non-zero entries of `d_max`.
    pub fn validate(&self, d_max: &[f64; 6]) -> Result<(), String> {
        let values = std::iter::once(&self.constant).chain(self.schedule.iter().map(|s| &s.value));
        for v in values {
            for i in 0..6 {
                if !v[i].is_finite() {
                    return Err(format!("disturbance component {i} is not finite"));
                }
                if d_max[i] > 0.0 && v[i].abs() > d_max[i] {
                    return Err(format!("disturbance component {i} = {} exceeds d_max = {}", v[i], d_max[i]));
                }
            }
        }
        if self.schedule.iter().any(|s| !(s.t.is_finite() && s.t >= 0.0)) {
            return Err("schedule times must be finite and non-negative".into());
        }
        if self.schedule.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err("schedule times must be strictly increasing".into());
        }
        Ok(())
    }
}
