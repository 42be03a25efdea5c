//! Rigid-body vehicle model: inertia, Coriolis, damping and restoring terms and
//! the body-frame equations of motion
//!
//! ```text
//! η̇ = J(η)ν
//! Mν̇ + C(ν)ν + D(ν)ν + g(η) = τ + τ_d
//! ```

mod kinematics;
mod params;

use nalgebra::{Matrix6, Vector3, Vector6};
use thiserror::Error;

pub use kinematics::{
    inverse_kinematic_transform, kinematic_transform, kinematic_transform_with_margin, pose_rate,
    rotation, transform_rate, DEFAULT_ATTITUDE_MARGIN,
};
pub use params::VehicleParams;

pub type Vec6 = Vector6<f64>;
pub type Mat6 = Matrix6<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("attitude too close to the Euler singularity (roll {roll:.6} rad, pitch {pitch:.6} rad)")]
    SingularAttitude { roll: f64, pitch: f64 },
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),
}

/// Global-frame position and ZYX Euler angles `[X, Y, Z, φ, θ, ψ]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pose(pub Vec6);

impl Pose {
    pub fn roll(&self) -> f64 {
        self.0[3]
    }
    pub fn pitch(&self) -> f64 {
        self.0[4]
    }
    pub fn yaw(&self) -> f64 {
        self.0[5]
    }
}

/// Body-frame velocity `[u, v, w, p, q, r]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BodyVelocity(pub Vec6);

impl BodyVelocity {
    pub fn linear(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }
    pub fn angular(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }
}

/// Body-frame forces (N) and moments (N·m). Used for the control input, the
/// environmental disturbance and its estimate alike.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Wrench(pub Vec6);

/// `M = M_rov + M_a`.
pub fn mass_matrix(p: &VehicleParams) -> Mat6 {
    let m = p.mass;
    let [xg, yg, zg] = p.cog;
    #[rustfmt::skip]
    let rigid = Mat6::new(
        m,        0.0,      0.0,      0.0,      m * zg,   -m * yg,
        0.0,      m,        0.0,      -m * zg,  0.0,      m * xg,
        0.0,      0.0,      m,        m * yg,   -m * xg,  0.0,
        0.0,      -m * zg,  m * yg,   p.ix,     -p.ixy,   -p.izx,
        m * zg,   0.0,      -m * xg,  -p.ixy,   p.iy,     -p.iyz,
        -m * yg,  m * xg,   0.0,      -p.izx,   -p.iyz,   p.iz,
    );
    rigid + Mat6::from_diagonal(&Vec6::from(p.added_mass))
}

/// `C(ν) = C_rov(ν) + C_a(ν)`.
///
/// The rigid-body part assumes diagonal inertia and the CoG at the body
/// origin; inertia products and a CoG offset only enter `M`.
pub fn coriolis_matrix(p: &VehicleParams, nu: &BodyVelocity) -> Mat6 {
    let m = p.mass;
    let [u, v, w, pr, q, r] = nu.0.into();
    let (ix, iy, iz) = (p.ix, p.iy, p.iz);
    #[rustfmt::skip]
    let rigid = Mat6::new(
        0.0,     0.0,     0.0,     0.0,     m * w,    -m * v,
        0.0,     0.0,     0.0,     -m * w,  0.0,      m * u,
        0.0,     0.0,     0.0,     m * v,   -m * u,   0.0,
        0.0,     m * w,   -m * v,  0.0,     iz * r,   -iy * q,
        -m * w,  0.0,     m * u,   -iz * r, 0.0,      ix * pr,
        m * v,   -m * u,  0.0,     iy * q,  -ix * pr, 0.0,
    );
    let [xa, ya, za, ka, ma, na] = p.added_mass;
    #[rustfmt::skip]
    let added = Mat6::new(
        0.0,      0.0,     0.0,      0.0,      -za * w,  ya * v,
        0.0,      0.0,     0.0,      za * w,   0.0,      -xa * u,
        0.0,      0.0,     0.0,      -ya * v,  xa * u,   0.0,
        0.0,      -za * w, ya * v,   0.0,      -na * r,  ma * q,
        za * w,   0.0,     -xa * u,  na * r,   0.0,      -ka * pr,
        -ya * v,  xa * u,  0.0,      -ma * q,  ka * pr,  0.0,
    );
    rigid + added
}

/// `D(ν) = D_l + D_nl` (diagonal).
pub fn damping_matrix(p: &VehicleParams, nu: &BodyVelocity) -> Mat6 {
    Mat6::from_diagonal(&damping_diagonal(p, nu))
}

fn damping_diagonal(p: &VehicleParams, nu: &BodyVelocity) -> Vec6 {
    Vec6::from_fn(|i, _| p.d_lin[i] + p.d_quad[i] * nu.0[i].abs())
}

/// Gravity and buoyancy forces and moments `g(η)`.
pub fn restoring_vector(p: &VehicleParams, eta: &Pose) -> Vec6 {
    let (w, b) = (p.weight(), p.buoyancy());
    let [xg, yg, zg] = p.cog;
    let [xb, yb, zb] = p.cob;
    let (sf, cf) = eta.roll().sin_cos();
    let (st, ct) = eta.pitch().sin_cos();
    let (dx, dy, dz) = (xg * w - xb * b, yg * w - yb * b, zg * w - zb * b);
    Vec6::new(
        (w - b) * st,
        -(w - b) * ct * sf,
        -(w - b) * ct * cf,
        -dy * ct * cf + dz * ct * sf,
        dz * st + dx * ct * cf,
        -dx * ct * sf - dy * st,
    )
}

/// Vehicle model with the inertia matrix and its inverse precomputed.
#[derive(Debug, Clone)]
pub struct Vehicle {
    params: VehicleParams,
    mass: Mat6,
    mass_inv: Mat6,
}

impl Vehicle {
    pub fn new(params: VehicleParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        let mass = mass_matrix(&params);
        let mass_inv = mass
            .cholesky()
            .ok_or_else(|| DynamicsError::InvalidParams("inertia matrix is not positive definite".into()))?
            .inverse();
        Ok(Self { params, mass, mass_inv })
    }

    pub fn bluerov2_heavy() -> Self {
        Self::new(VehicleParams::bluerov2_heavy()).expect("bundled parameters are valid")
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn mass(&self) -> &Mat6 {
        &self.mass
    }

    pub fn mass_inv(&self) -> &Mat6 {
        &self.mass_inv
    }

    /// `C(ν)ν + D(ν)ν`, the velocity-dependent body-frame forces.
    pub fn velocity_forces(&self, nu: &BodyVelocity) -> Vec6 {
        coriolis_matrix(&self.params, nu) * nu.0 + damping_diagonal(&self.params, nu).component_mul(&nu.0)
    }

    pub fn restoring(&self, eta: &Pose) -> Vec6 {
        restoring_vector(&self.params, eta)
    }

    /// Returns `(η̇, ν̇)` for the given control and disturbance wrenches.
    pub fn state_derivative(
        &self,
        eta: &Pose,
        nu: &BodyVelocity,
        tau: &Wrench,
        tau_d: &Wrench,
    ) -> Result<(Vec6, Vec6), DynamicsError> {
        let eta_dot = pose_rate(eta, nu)?;
        let rhs = tau.0 + tau_d.0 - self.velocity_forces(nu) - self.restoring(eta);
        Ok((eta_dot, self.mass_inv * rhs))
    }
}

/// Free-function form of [`Vehicle::state_derivative`].
pub fn state_derivative(
    p: &VehicleParams,
    eta: &Pose,
    nu: &BodyVelocity,
    tau: &Wrench,
    tau_d: &Wrench,
) -> Result<(Vec6, Vec6), DynamicsError> {
    Vehicle::new(p.clone())?.state_derivative(eta, nu, tau, tau_d)
}
