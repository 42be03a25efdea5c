//! Reference trajectories with analytic first and second derivatives.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::controller::ReferencePoint;
use crate::dynamics::Vec6;

use super::SimError;

/// Heading target of a polyline: one value for the whole path or one per
/// segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Heading {
    Constant(f64),
    PerSegment(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Trajectory {
    /// `η_d = [start + v·t, 0, 0, heading]`.
    StraightLine {
        velocity: [f64; 3],
        heading: f64,
        #[serde(default)]
        start: [f64; 3],
    },
    /// Constant-speed legs between waypoints. Velocity changes at each
    /// corner (and the stop at the last waypoint) are ramped linearly over
    /// `blend` seconds centred on the nominal corner time, heading changes
    /// follow a smoothstep over the same window.
    WaypointPolyline {
        waypoints: Vec<[f64; 3]>,
        speed: f64,
        heading: Heading,
        #[serde(default = "default_blend")]
        blend: f64,
    },
    /// Fixed set-point.
    Hold { pose: [f64; 6] },
}

fn default_blend() -> f64 {
    2.0
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::straight_line()
    }
}

impl Trajectory {
    /// Diagonal transit at 0.2 m/s in X and Y with the heading at π/4.
    pub fn straight_line() -> Self {
        Self::StraightLine { velocity: [0.2, 0.2, 0.0], heading: FRAC_PI_4, start: [0.0; 3] }
    }

    /// 8 m × 8 m square at 0.2 m/s starting and ending at the origin.
    pub fn square(side: f64, speed: f64) -> Self {
        Self::WaypointPolyline {
            waypoints: vec![[0.0, 0.0, 0.0], [side, 0.0, 0.0], [side, side, 0.0], [0.0, side, 0.0], [0.0, 0.0, 0.0]],
            speed,
            heading: Heading::Constant(FRAC_PI_4),
            blend: default_blend(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let attitude_ok = |a: f64| a.abs() < std::f64::consts::FRAC_PI_2;
        match self {
            Self::StraightLine { velocity, heading, start } => {
                if !(finite(velocity) && finite(start) && heading.is_finite()) {
                    return Err("straight_line entries must be finite".into());
                }
                if velocity.iter().all(|v| *v == 0.0) {
                    return Err("straight_line velocity must be non-zero".into());
                }
            }
            Self::WaypointPolyline { waypoints, speed, heading, blend } => {
                if waypoints.len() < 2 {
                    return Err("waypoint_polyline needs at least 2 waypoints".into());
                }
                if !(speed.is_finite() && *speed > 0.0) {
                    return Err(format!("waypoint_polyline speed must be positive, got {speed}"));
                }
                if !(blend.is_finite() && *blend >= 0.0) {
                    return Err(format!("waypoint_polyline blend must be non-negative, got {blend}"));
                }
                if !waypoints.iter().all(|w| finite(w)) {
                    return Err("waypoints must be finite".into());
                }
                if let Heading::PerSegment(h) = heading {
                    if h.len() != waypoints.len() - 1 {
                        return Err(format!("{} waypoints need {} headings, got {}", waypoints.len(), waypoints.len() - 1, h.len()));
                    }
                }
                for (k, w) in waypoints.windows(2).enumerate() {
                    let len = distance(&w[0], &w[1]);
                    if len == 0.0 {
                        return Err(format!("waypoints {k} and {} coincide", k + 1));
                    }
                    if len / speed < *blend {
                        return Err(format!("segment {k} lasts {:.3} s, shorter than the {blend} s blend", len / speed));
                    }
                }
            }
            Self::Hold { pose } => {
                if !finite(pose) {
                    return Err("hold pose must be finite".into());
                }
                if !(attitude_ok(pose[3]) && attitude_ok(pose[4])) {
                    return Err("hold roll and pitch must stay inside (-pi/2, pi/2)".into());
                }
            }
        }
        Ok(())
    }

    /// Time at which the path is complete, if it ends.
    pub fn duration(&self) -> Option<f64> {
        match self {
            Self::WaypointPolyline { waypoints, speed, .. } => {
                Some(waypoints.windows(2).map(|w| distance(&w[0], &w[1])).sum::<f64>() / speed)
            }
            _ => None,
        }
    }

    /// Start times of each polyline segment followed by the arrival time.
    pub fn corner_times(&self) -> Vec<f64> {
        match self {
            Self::WaypointPolyline { waypoints, speed, .. } => {
                let mut t = vec![0.0];
                for w in waypoints.windows(2) {
                    t.push(t.last().unwrap() + distance(&w[0], &w[1]) / speed);
                }
                t
            }
            _ => Vec::new(),
        }
    }

    /// Reference at `t ≥ 0`; times past the end of a polyline hold the last
    /// waypoint.
    pub fn evaluate(&self, t: f64) -> ReferencePoint {
        match self {
            Self::StraightLine { velocity, heading, start } => {
                let mut r = ReferencePoint::default();
                for i in 0..3 {
                    r.pose[i] = start[i] + velocity[i] * t;
                    r.velocity[i] = velocity[i];
                }
                r.pose[5] = *heading;
                r
            }
            Self::Hold { pose } => ReferencePoint::hold(Vec6::from(*pose)),
            Self::WaypointPolyline { waypoints, speed, heading, blend } => {
                polyline(waypoints, *speed, heading, *blend, t)
            }
        }
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Integral of `ramp − step` across a corner of width `tb`, at offset `u`
/// from the corner time.
fn ramp_offset(u: f64, tb: f64) -> f64 {
    let h = 0.5 * tb;
    if u <= -h || u >= h || tb == 0.0 {
        0.0
    } else if u < 0.0 {
        (u + h).powi(2) / (2.0 * tb)
    } else {
        (h - u).powi(2) / (2.0 * tb)
    }
}

/// Fraction of the velocity change applied and its rate.
fn ramp(u: f64, tb: f64) -> (f64, f64) {
    let h = 0.5 * tb;
    if tb == 0.0 {
        (if u >= 0.0 { 1.0 } else { 0.0 }, 0.0)
    } else if u <= -h {
        (0.0, 0.0)
    } else if u >= h {
        (1.0, 0.0)
    } else {
        ((u + h) / tb, 1.0 / tb)
    }
}

/// Smoothstep `3x² − 2x³` over the window and its first two derivatives.
fn smoothstep(u: f64, tb: f64) -> (f64, f64, f64) {
    let h = 0.5 * tb;
    if tb == 0.0 {
        return (if u >= 0.0 { 1.0 } else { 0.0 }, 0.0, 0.0);
    }
    if u <= -h {
        return (0.0, 0.0, 0.0);
    }
    if u >= h {
        return (1.0, 0.0, 0.0);
    }
    let x = (u + h) / tb;
    (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x) / tb, (6.0 - 12.0 * x) / (tb * tb))
}

fn polyline(waypoints: &[[f64; 3]], speed: f64, heading: &Heading, tb: f64, t: f64) -> ReferencePoint {
    let segs = waypoints.len() - 1;
    let mut starts = Vec::with_capacity(segs + 1);
    let mut vels = Vec::with_capacity(segs + 1);
    let mut t0 = 0.0;
    for w in waypoints.windows(2) {
        let len = distance(&w[0], &w[1]);
        starts.push(t0);
        vels.push([0, 1, 2].map(|i| (w[1][i] - w[0][i]) / len * speed));
        t0 += len / speed;
    }
    starts.push(t0);
    vels.push([0.0; 3]);

    let mut r = ReferencePoint::default();
    // unblended piecewise-linear path
    let k = starts[..segs].iter().rposition(|s| *s <= t).unwrap_or(0);
    if t >= t0 {
        r.pose.fixed_rows_mut::<3>(0).copy_from_slice(&waypoints[segs]);
    } else {
        for i in 0..3 {
            r.pose[i] = waypoints[k][i] + vels[k][i] * (t - starts[k]);
        }
    }
    for i in 0..3 {
        r.velocity[i] = vels[0][i];
    }
    // corner corrections
    for c in 1..=segs {
        let u = t - starts[c];
        let (frac, rate) = ramp(u, tb);
        let off = ramp_offset(u, tb);
        for i in 0..3 {
            let dv = vels[c][i] - vels[c - 1][i];
            r.pose[i] += dv * off;
            r.velocity[i] += dv * frac;
            r.acceleration[i] += dv * rate;
        }
    }

    match heading {
        Heading::Constant(h) => r.pose[5] = *h,
        Heading::PerSegment(h) => {
            r.pose[5] = h[0];
            for c in 1..segs {
                let (s, ds, dds) = smoothstep(t - starts[c], tb);
                let dh = h[c] - h[c - 1];
                r.pose[5] += dh * s;
                r.velocity[5] += dh * ds;
                r.acceleration[5] += dh * dds;
            }
        }
    }
    r
}

/// Reference at `t`, rejecting times outside `[0, horizon]`.
pub fn reference_at(traj: &Trajectory, t: f64, horizon: f64) -> Result<ReferencePoint, SimError> {
    if !(t >= 0.0 && t <= horizon) {
        return Err(SimError::OutOfHorizon { t, horizon });
    }
    Ok(traj.evaluate(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Trajectory {
        Trajectory::square(8.0, 0.2)
    }

    #[test]
    fn straight_line_values() {
        let r = reference_at(&Trajectory::straight_line(), 10.0, 60.0).unwrap();
        let expected = Vec6::from([2.0, 2.0, 0.0, 0.0, 0.0, FRAC_PI_4]);
        assert!((r.pose - expected).norm() < 1e-12);
        for t in [0.0, 3.3, 59.0] {
            let r = Trajectory::straight_line().evaluate(t);
            assert_eq!(r.acceleration, Vec6::zeros());
            assert_eq!(r.velocity, Vec6::from([0.2, 0.2, 0.0, 0.0, 0.0, 0.0]));
        }
        assert_eq!(Trajectory::straight_line().evaluate(0.0).pose.fixed_rows::<3>(0).norm(), 0.0);
    }

    #[test]
    fn horizon_is_enforced() {
        assert!(matches!(
            reference_at(&Trajectory::straight_line(), 60.02, 60.01),
            Err(SimError::OutOfHorizon { .. })
        ));
        assert!(reference_at(&Trajectory::straight_line(), -1e-9, 60.0).is_err());
        assert!(reference_at(&Trajectory::straight_line(), 60.01, 60.01).is_ok());
    }

    #[test]
    fn square_corner_times() {
        let sq = square();
        assert_eq!(sq.corner_times(), vec![0.0, 40.0, 80.0, 120.0, 160.0]);
        assert_eq!(sq.duration(), Some(160.0));
        let mid = sq.evaluate(60.0);
        assert!((mid.pose[0] - 8.0).abs() < 1e-12 && (mid.pose[1] - 4.0).abs() < 1e-12);
        assert!((mid.velocity[1] - 0.2).abs() < 1e-12 && mid.velocity[0].abs() < 1e-12);
        let end = sq.evaluate(170.0);
        assert!(end.pose.fixed_rows::<3>(0).norm() < 1e-12);
        assert_eq!(end.velocity, Vec6::zeros());
    }

    #[test]
    fn polyline_derivatives_are_consistent() {
        let sq = Trajectory::WaypointPolyline {
            waypoints: vec![[0.0, 0.0, 0.0], [8.0, 0.0, 1.0], [8.0, 8.0, 1.0]],
            speed: 0.2,
            heading: Heading::PerSegment(vec![0.0, 1.2]),
            blend: 2.0,
        };
        sq.validate().unwrap();
        let h = 1e-5;
        let mut t = 0.5;
        while t < 90.0 {
            let (a, b, c) = (sq.evaluate(t - h), sq.evaluate(t), sq.evaluate(t + h));
            let dv = (c.pose - a.pose) / (2.0 * h);
            let da = (c.velocity - a.velocity) / (2.0 * h);
            assert!((dv - b.velocity).norm() < 1e-6, "velocity at {t}");
            assert!((da - b.acceleration).norm() < 1e-4 || near_kink(t), "acceleration at {t}");
            t += 0.37;
        }
    }

    fn near_kink(t: f64) -> bool {
        [39.0, 41.0, 79.0, 81.0].iter().any(|k| (t - k).abs() < 1e-4)
    }

    #[test]
    fn position_is_continuous_at_corner_edges() {
        let sq = square();
        for tc in [40.0, 80.0, 120.0, 160.0] {
            for edge in [tc - 1.0, tc, tc + 1.0] {
                let a = sq.evaluate(edge - 1e-9).pose;
                let b = sq.evaluate(edge + 1e-9).pose;
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn invalid_trajectories() {
        let mut bad = square();
        if let Trajectory::WaypointPolyline { waypoints, .. } = &mut bad {
            waypoints.truncate(1);
        }
        assert!(bad.validate().is_err());
        let bad = Trajectory::WaypointPolyline {
            waypoints: vec![[0.0; 3], [0.1, 0.0, 0.0]],
            speed: 0.2,
            heading: Heading::Constant(0.0),
            blend: 2.0,
        };
        assert!(bad.validate().is_err());
        assert!(Trajectory::Hold { pose: [0.0, 0.0, 0.0, 0.0, 1.6, 0.0] }.validate().is_err());
        assert!(Trajectory::StraightLine { velocity: [0.0; 3], heading: 0.0, start: [0.0; 3] }.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"type":"waypoint_polyline","waypoints":[[0,0,0],[8,0,0]],"speed":0.2,"heading":0.785}"#;
        let t: Trajectory = serde_json::from_str(text).unwrap();
        assert!(matches!(t, Trajectory::WaypointPolyline { blend, .. } if blend == 2.0));
        let back: Trajectory = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
