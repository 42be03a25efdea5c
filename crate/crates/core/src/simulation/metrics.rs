use serde::{Deserialize, Serialize};

use crate::controller::wrap_angle;

use super::{LogRow, SimError, SimLog};

/// Length of the trailing window the steady-state figures are averaged over (s).
pub const FINAL_WINDOW: f64 = 10.0;

/// Slack allowed per step before a rise in `V_c` counts as a violation.
const VC_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: usize,
    pub duration: f64,
    /// Start of the trailing window.
    pub window_start: f64,
    pub rms_error: [f64; 6],
    /// Mean `|η − η_d|` over the window.
    pub final_error: [f64; 6],
    /// Mean planar distance to the reference over the window.
    pub final_xy_error: f64,
    /// Planar distance at the last row.
    pub terminal_xy_error: f64,
    pub final_estimate: [f64; 6],
    /// Mean `|τ̂_d − τ_d|` over the window.
    pub final_estimation_error: [f64; 6],
    /// Half the peak-to-peak heave error over the window.
    pub z_amplitude: f64,
    /// Half the peak-to-peak pitch error over the window.
    pub pitch_amplitude: f64,
    /// Rows after `t = 1 s` where `V_c` rose by more than the slack.
    pub vc_violations: usize,
    pub cost: f64,
}

fn error(r: &LogRow) -> [f64; 6] {
    let mut e = [0.0; 6];
    for i in 0..6 {
        e[i] = r.eta[i] - r.eta_d[i];
    }
    e[5] = wrap_angle(e[5]);
    e
}

fn half_range(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    0.5 * (hi - lo)
}

pub fn metrics(log: &SimLog) -> Result<Metrics, SimError> {
    metrics_with_window(log, FINAL_WINDOW)
}

pub fn metrics_with_window(log: &SimLog, window: f64) -> Result<Metrics, SimError> {
    let (first, last) = match (log.rows.first(), log.rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(SimError::EmptyLog),
    };
    let start = (last.t - window).max(first.t);
    let tail: Vec<&LogRow> = log.rows.iter().filter(|r| r.t >= start - 1e-9).collect();
    let n_all = log.rows.len() as f64;
    let n_tail = tail.len() as f64;

    let mut rms = [0.0; 6];
    for r in &log.rows {
        let e = error(r);
        for i in 0..6 {
            rms[i] += e[i] * e[i];
        }
    }
    rms.iter_mut().for_each(|v| *v = (*v / n_all).sqrt());

    let mut final_error = [0.0; 6];
    let mut final_estimate = [0.0; 6];
    let mut final_estimation_error = [0.0; 6];
    let mut final_xy = 0.0;
    for r in &tail {
        let e = error(r);
        for i in 0..6 {
            final_error[i] += e[i].abs() / n_tail;
            final_estimate[i] += r.tau_hat[i] / n_tail;
            final_estimation_error[i] += (r.tau_hat[i] - r.tau_d[i]).abs() / n_tail;
        }
        final_xy += e[0].hypot(e[1]) / n_tail;
    }
    let te = error(last);

    let vc_violations = log
        .rows
        .windows(2)
        .filter(|w| w[0].t >= 1.0 && w[1].vc > w[0].vc + VC_SLACK)
        .count();

    Ok(Metrics {
        rows: log.rows.len(),
        duration: last.t - first.t,
        window_start: start,
        rms_error: rms,
        final_error,
        final_xy_error: final_xy,
        terminal_xy_error: te[0].hypot(te[1]),
        final_estimate,
        final_estimation_error,
        z_amplitude: half_range(tail.iter().map(|r| error(r)[2])),
        pitch_amplitude: half_range(tail.iter().map(|r| error(r)[4])),
        vc_violations,
        cost: last.j_run,
    })
}
