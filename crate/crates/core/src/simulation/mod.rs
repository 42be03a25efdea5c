//! Closed-loop simulation: vehicle, controller and disturbance estimate
//! integrated together with fixed-step RK4.

mod config;
mod disturbance;
mod log;
mod metrics;
mod trajectory;

pub use config::{
    merge_patch, AdaptationSpec, ConfigError, CostSpec, GainsSource, InitialSpec, IntegratorSpec, SimConfig, VehicleSource,
};
pub use disturbance::{DisturbanceModel, ScheduleStep, STANDARD_DISTURBANCE};
pub use log::{fmt_f64, LogRow, SimLog, CSV_HEADER};
pub use metrics::{metrics, metrics_with_window, Metrics, FINAL_WINDOW};
pub use trajectory::{reference_at, Heading, Trajectory};

use thiserror::Error;

use crate::controller::{adaptation_derivative, adaptation_rates, AdaptationConfig, AdaptationMode, Gains, LoopTerms};
use crate::dynamics::{BodyVelocity, DynamicsError, Pose, Vec6, Vehicle, Wrench};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("t = {t:.3} s: {source}")]
    Dynamics { t: f64, source: DynamicsError },
    #[error("state left the finite range at t = {t:.3} s")]
    NonFinite { t: f64 },
    #[error("t = {t} s is outside the horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("log has no rows")]
    EmptyLog,
}

/// Augmented state `(η, ν, τ̂_d)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct State {
    pub eta: Vec6,
    pub nu: Vec6,
    pub tau_hat: Vec6,
}

impl State {
    fn axpy(&self, h: f64, d: &State) -> State {
        State { eta: self.eta + d.eta * h, nu: self.nu + d.nu * h, tau_hat: self.tau_hat + d.tau_hat * h }
    }

    fn is_finite(&self) -> bool {
        self.eta.iter().chain(self.nu.iter()).chain(self.tau_hat.iter()).all(|v| v.is_finite())
    }
}

/// Controller output at one time and state.
#[derive(Debug, Clone, Copy)]
pub struct ControlSample {
    pub eta_d: Vec6,
    pub tau: Vec6,
    /// Estimate the wrench was computed with.
    pub tau_hat: Vec6,
    pub tau_hat_rate: Vec6,
    pub s: Vec6,
    pub e: Vec6,
    pub gamma: Vec6,
}

/// Classical RK4 step of `ẋ = f(t, x)`.
pub fn rk4<F>(x: &State, t: f64, dt: f64, mut f: F) -> Result<State, SimError>
where
    F: FnMut(f64, &State) -> Result<State, SimError>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * dt, &x.axpy(0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &x.axpy(0.5 * dt, &k2))?;
    let k4 = f(t + dt, &x.axpy(dt, &k3))?;
    let mut next = *x;
    next.eta += (k1.eta + (k2.eta + k3.eta) * 2.0 + k4.eta) * (dt / 6.0);
    next.nu += (k1.nu + (k2.nu + k3.nu) * 2.0 + k4.nu) * (dt / 6.0);
    next.tau_hat += (k1.tau_hat + (k2.tau_hat + k3.tau_hat) * 2.0 + k4.tau_hat) * (dt / 6.0);
    Ok(next)
}

/// A validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub vehicle: Vehicle,
    pub trajectory: Trajectory,
    pub disturbance: DisturbanceModel,
    pub gains: Gains,
    pub adaptation: AdaptationConfig,
    pub dt: f64,
    pub tf: f64,
    /// Controller update period when running sampled (zero-order hold).
    pub zoh: Option<f64>,
    pub q: [f64; 6],
    pub r: [f64; 6],
    pub initial: State,
}

impl Simulation {
    /// Standard straight-line scenario with fuzzy adaptation over 60 s.
    pub fn standard() -> Self {
        SimConfig::default().build().expect("default configuration is valid")
    }

    pub fn with_mode(mut self, mode: AdaptationMode) -> Self {
        self.adaptation.mode = mode;
        self
    }

    pub fn with_gains(mut self, gains: Gains) -> Self {
        self.gains = gains;
        self
    }

    /// Number of integration steps, `floor(tf/dt)`.
    pub fn steps(&self) -> usize {
        (self.tf / self.dt + 1e-9).floor() as usize
    }

    fn dyn_err(t: f64) -> impl Fn(DynamicsError) -> SimError {
        move |source| SimError::Dynamics { t, source }
    }

    pub fn control(&self, t: f64, x: &State) -> Result<ControlSample, SimError> {
        let reference = reference_at(&self.trajectory, t, self.tf + self.dt)?;
        let (eta, nu) = (Pose(x.eta), BodyVelocity(x.nu));
        let terms = LoopTerms::new(&self.vehicle, &eta, &nu, &reference, &self.gains).map_err(Self::dyn_err(t))?;
        let cfg = &self.adaptation;
        let (tau_hat, gamma, rate) = match cfg.mode {
            AdaptationMode::Baseline => (Vec6::zeros(), Vec6::zeros(), Vec6::zeros()),
            AdaptationMode::Oracle => (self.disturbance.at(t).0, Vec6::zeros(), Vec6::zeros()),
            AdaptationMode::Constant | AdaptationMode::Fuzzy => {
                let b = terms.drive();
                let gamma = match (cfg.mode, cfg.fis_input) {
                    (AdaptationMode::Fuzzy, crate::controller::FisInput::Direct) => {
                        adaptation_rates(cfg, &terms.fis_signal(cfg.fis_input))
                    }
                    _ => adaptation_rates(cfg, &b),
                };
                let rate = adaptation_derivative(&gamma, &b, &Wrench(x.tau_hat), &cfg.d_max);
                (x.tau_hat, gamma, rate)
            }
        };
        Ok(ControlSample {
            eta_d: reference.pose,
            tau: terms.wrench(&Wrench(tau_hat)).0,
            tau_hat,
            tau_hat_rate: rate,
            s: terms.s,
            e: terms.e,
            gamma,
        })
    }

    fn derivative(&self, t: f64, x: &State, c: &ControlSample) -> Result<State, SimError> {
        let tau_d = self.disturbance.at(t);
        let (eta_dot, nu_dot) = self
            .vehicle
            .state_derivative(&Pose(x.eta), &BodyVelocity(x.nu), &Wrench(c.tau), &tau_d)
            .map_err(Self::dyn_err(t))?;
        Ok(State { eta: eta_dot, nu: nu_dot, tau_hat: c.tau_hat_rate })
    }

    /// One RK4 step from `(t, x)` with the controller re-evaluated at every
    /// stage.
    pub fn rk4_step(&self, x: &State, t: f64) -> Result<State, SimError> {
        let first = self.control(t, x)?;
        self.advance(x, t, &first, false)
    }

    /// RK4 step whose first stage reuses `first`; with `hold` that sample is
    /// applied over the whole step.
    fn advance(&self, x: &State, t: f64, first: &ControlSample, hold: bool) -> Result<State, SimError> {
        let mut stage = 0;
        let next = rk4(x, t, self.dt, |ts, xs| {
            let c = if stage == 0 || hold { *first } else { self.control(ts, xs)? };
            stage += 1;
            self.derivative(ts, xs, &c)
        })?;
        let t1 = t + self.dt;
        if !next.is_finite() {
            return Err(SimError::NonFinite { t: t1 });
        }
        // catch a singular attitude at the step boundary rather than the next stage
        crate::dynamics::kinematic_transform(&Pose(next.eta)).map_err(Self::dyn_err(t1))?;
        Ok(next)
    }

    fn integrate(&self, mut on_row: impl FnMut(LogRow)) -> Result<(), SimError> {
        let n = self.steps();
        let hold_every = self.zoh.map(|p| ((p / self.dt).round() as usize).max(1));
        let mut x = self.initial;
        let mut held: Option<ControlSample> = None;
        let mut j_run = 0.0;
        let mut prev_integrand: Option<f64> = None;
        for k in 0..=n {
            let t = k as f64 * self.dt;
            let fresh = self.control(t, &x)?;
            let applied = match hold_every {
                Some(m) if k % m != 0 => {
                    let h = held.expect("held sample exists after the first step");
                    ControlSample { s: fresh.s, e: fresh.e, eta_d: fresh.eta_d, ..h }
                }
                Some(_) => {
                    held = Some(fresh);
                    fresh
                }
                None => fresh,
            };
            let integrand = quadratic(&applied.s, &self.q) + quadratic(&applied.tau, &self.r);
            if let Some(p) = prev_integrand {
                j_run += 0.5 * self.dt * (p + integrand);
            }
            prev_integrand = Some(integrand);
            on_row(LogRow {
                t,
                eta: x.eta.into(),
                nu: x.nu.into(),
                eta_d: applied.eta_d.into(),
                tau: applied.tau.into(),
                tau_hat: applied.tau_hat.into(),
                tau_d: self.disturbance.at(t).0.into(),
                s: applied.s.into(),
                gamma: applied.gamma.into(),
                vc: 0.5 * applied.s.norm_squared(),
                j_run,
            });
            if k == n {
                break;
            }
            x = match (hold_every, &held) {
                (Some(_), Some(h)) => self.advance(&x, t, h, true)?,
                _ => self.advance(&x, t, &fresh, false)?,
            };
        }
        Ok(())
    }

    pub fn run(&self) -> Result<SimLog, SimError> {
        let mut rows = Vec::with_capacity(self.steps() + 1);
        self.integrate(|r| rows.push(r))?;
        Ok(SimLog { rows })
    }

    /// Final running cost without keeping the log.
    pub fn run_cost(&self) -> Result<f64, SimError> {
        let mut j = 0.0;
        self.integrate(|r| j = r.j_run)?;
        Ok(j)
    }
}

fn quadratic(v: &Vec6, w: &[f64; 6]) -> f64 {
    v.iter().zip(w).map(|(x, w)| w * x * x).sum()
}

/// Builds and runs a configuration.
pub fn run(cfg: &SimConfig) -> Result<SimLog, RunError> {
    Ok(cfg.build()?.run()?)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Trapezoidal `∫ sᵀQs + τᵀRτ dt` over the log grid.
pub fn cost(log: &SimLog, q: &[f64; 6], r: &[f64; 6]) -> Result<f64, SimError> {
    if log.rows.is_empty() {
        return Err(SimError::EmptyLog);
    }
    let f = |row: &LogRow| quadratic(&row.s.into(), q) + quadratic(&row.tau.into(), r);
    Ok(log.rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::kinematic_transform;

    fn hold_at_origin() -> Simulation {
        let mut sim = Simulation::standard();
        sim.trajectory = Trajectory::Hold { pose: [0.0; 6] };
        sim.disturbance = DisturbanceModel::none();
        sim.tf = 2.0;
        sim
    }

    #[test]
    fn equilibrium_stays_put() {
        let log = hold_at_origin().run().unwrap();
        let last = log.rows.last().unwrap();
        assert!(last.eta.iter().chain(&last.nu).chain(&last.tau_hat).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn row_count_and_grid() {
        let sim = Simulation::standard();
        assert_eq!(sim.steps(), 6000);
        let mut short = sim.clone();
        short.tf = 0.0;
        let log = short.run().unwrap();
        assert_eq!(log.rows.len(), 1);
        assert_eq!(log.rows[0].eta, [0.0; 6]);
        short.tf = 0.05;
        let log = short.run().unwrap();
        assert_eq!(log.rows.len(), 6);
        assert!((log.rows[5].t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn cost_quadrature() {
        let mut log = SimLog { rows: Vec::new() };
        assert_eq!(cost(&log, &[1.0; 6], &[1.0; 6]), Err(SimError::EmptyLog));
        for k in 0..=1000 {
            log.rows.push(LogRow { t: k as f64 * 0.01, s: [1.0; 6], ..LogRow::default() });
        }
        assert!((cost(&log, &[1.0; 6], &[1.0; 6]).unwrap() - 60.0).abs() < 1e-9);
        for r in &mut log.rows {
            r.s = [0.0; 6];
        }
        assert_eq!(cost(&log, &[1.0; 6], &[1.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn running_cost_matches_quadrature() {
        let mut sim = Simulation::standard();
        sim.tf = 3.0;
        let log = sim.run().unwrap();
        let j = cost(&log, &sim.q, &sim.r).unwrap();
        assert!((log.rows.last().unwrap().j_run - j).abs() < 1e-9 * j.max(1.0));
        assert_eq!(sim.run_cost().unwrap(), log.rows.last().unwrap().j_run);
    }

    #[test]
    fn kinetic_energy_never_grows_without_forcing() {
        let veh = Vehicle::bluerov2_heavy();
        let mut p = veh.params().clone();
        p.volume = p.weight() / (p.rho * p.g0);
        p.cob = p.cog;
        let veh = Vehicle::new(p).unwrap();
        let mut x = State { nu: Vec6::from([0.5, -0.3, 0.2, 0.3, -0.2, 0.4]), ..State::default() };
        let energy = |x: &State| 0.5 * x.nu.dot(&(veh.mass() * x.nu));
        let mut prev = energy(&x);
        for k in 0..2000 {
            x = rk4(&x, k as f64 * 0.01, 0.01, |_, s| {
                let (de, dn) = veh
                    .state_derivative(&Pose(s.eta), &BodyVelocity(s.nu), &Wrench::default(), &Wrench::default())
                    .map_err(|source| SimError::Dynamics { t: 0.0, source })?;
                Ok(State { eta: de, nu: dn, tau_hat: Vec6::zeros() })
            })
            .unwrap();
            let e = energy(&x);
            assert!(e <= prev + 1e-12, "energy rose at step {k}");
            prev = e;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn step_halving_terminal_change() {
        let mut a = Simulation::standard();
        a.tf = 20.0;
        let mut b = a.clone();
        b.dt = 0.005;
        let ea = a.run().unwrap().rows.last().unwrap().eta;
        let eb = b.run().unwrap().rows.last().unwrap().eta;
        let diff = ea.iter().zip(&eb).take(3).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "terminal position changed by {diff}");
    }

    #[test]
    fn oracle_surface_energy_descends() {
        let sim = Simulation::standard().with_mode(AdaptationMode::Oracle);
        let mut sim = sim;
        sim.tf = 15.0;
        sim.initial.eta = Vec6::from([0.3, -0.2, 0.1, 0.05, -0.05, 0.2]);
        let log = sim.run().unwrap();
        let mut prev = f64::INFINITY;
        for r in log.rows.iter().filter(|r| r.t >= 1.0) {
            assert!(r.vc <= prev + 1e-6, "V_c rose at t = {}", r.t);
            prev = r.vc;
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let mut sim = Simulation::standard();
        sim.tf = 2.0;
        assert_eq!(sim.run().unwrap().to_csv(), sim.run().unwrap().to_csv());
    }

    #[test]
    fn forced_singular_pitch_is_reported() {
        let mut sim = hold_at_origin();
        sim.initial.eta[4] = 1.5;
        sim.initial.nu[4] = 5.0;
        sim.gains = Gains { k1: [0.1; 6], k2: [0.1; 6] };
        let err = sim.run().unwrap_err();
        assert!(matches!(err, SimError::Dynamics { source: DynamicsError::SingularAttitude { .. }, t } if t > 0.0));
        assert!(kinematic_transform(&Pose::default()).is_ok());
    }

    #[test]
    fn zoh_mode_runs_and_tracks() {
        let mut sim = Simulation::standard();
        sim.zoh = Some(0.05);
        sim.tf = 5.0;
        let log = sim.run().unwrap();
        assert_eq!(log.rows[1].tau, log.rows[2].tau);
        assert_ne!(log.rows[4].tau, log.rows[5].tau);
    }
}
