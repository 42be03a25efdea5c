//! Body-to-global transformation for ZYX Euler angles.

use nalgebra::{Matrix3, Vector3};

use super::{BodyVelocity, DynamicsError, Mat6, Pose, Vec6};

/// Default distance kept from the ±π/2 roll/pitch singularity (rad).
pub const DEFAULT_ATTITUDE_MARGIN: f64 = 1e-3;

fn check_attitude(eta: &Pose, margin: f64) -> Result<(), DynamicsError> {
    let (roll, pitch) = (eta.roll(), eta.pitch());
    let limit = std::f64::consts::FRAC_PI_2 - margin;
    if !(roll.abs() <= limit && pitch.abs() <= limit) {
        return Err(DynamicsError::SingularAttitude { roll, pitch });
    }
    Ok(())
}

/// Rotation from body to global frame, `R = Rz(ψ)·Ry(θ)·Rx(φ)`.
pub fn rotation(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sf, cf) = roll.sin_cos();
    let (st, ct) = pitch.sin_cos();
    let (sp, cp) = yaw.sin_cos();
    Matrix3::new(
        cp * ct,
        -sp * cf + cp * st * sf,
        sp * sf + cp * cf * st,
        sp * ct,
        cp * cf + sf * st * sp,
        -cp * sf + st * sp * cf,
        -st,
        ct * sf,
        ct * cf,
    )
}

/// Maps body angular rates to Euler angle rates.
fn euler_rate_matrix(roll: f64, pitch: f64) -> Matrix3<f64> {
    let (sf, cf) = roll.sin_cos();
    let (st, ct) = pitch.sin_cos();
    let tt = st / ct;
    Matrix3::new(1.0, sf * tt, cf * tt, 0.0, cf, -sf, 0.0, sf / ct, cf / ct)
}

fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn block_diag(a: &Matrix3<f64>, b: &Matrix3<f64>) -> Mat6 {
    let mut j = Mat6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(b);
    j
}

/// `J(η)` with the default attitude margin.
pub fn kinematic_transform(eta: &Pose) -> Result<Mat6, DynamicsError> {
    kinematic_transform_with_margin(eta, DEFAULT_ATTITUDE_MARGIN)
}

pub fn kinematic_transform_with_margin(eta: &Pose, margin: f64) -> Result<Mat6, DynamicsError> {
    check_attitude(eta, margin)?;
    Ok(block_diag(
        &rotation(eta.roll(), eta.pitch(), eta.yaw()),
        &euler_rate_matrix(eta.roll(), eta.pitch()),
    ))
}

/// Closed-form `J(η)⁻¹`: the rotation block is transposed, the Euler-rate
/// block inverted analytically.
pub fn inverse_kinematic_transform(eta: &Pose) -> Result<Mat6, DynamicsError> {
    check_attitude(eta, DEFAULT_ATTITUDE_MARGIN)?;
    let (sf, cf) = eta.roll().sin_cos();
    let (st, ct) = eta.pitch().sin_cos();
    let rate_inv = Matrix3::new(1.0, 0.0, -st, 0.0, cf, ct * sf, 0.0, -sf, ct * cf);
    Ok(block_diag(
        &rotation(eta.roll(), eta.pitch(), eta.yaw()).transpose(),
        &rate_inv,
    ))
}

/// Time derivative of `J(η)` along `η̇ = J(η)ν`.
///
/// The rotation block uses `Ṙ = R·S(ω)`; the Euler-rate block is
/// differentiated entry by entry.
pub fn transform_rate(eta: &Pose, nu: &BodyVelocity) -> Result<Mat6, DynamicsError> {
    check_attitude(eta, DEFAULT_ATTITUDE_MARGIN)?;
    let (roll, pitch, yaw) = (eta.roll(), eta.pitch(), eta.yaw());
    let omega = nu.angular();
    let rates = euler_rate_matrix(roll, pitch) * omega;
    let (droll, dpitch) = (rates.x, rates.y);

    let (sf, cf) = roll.sin_cos();
    let (st, ct) = pitch.sin_cos();
    let tt = st / ct;
    let sec2 = 1.0 / (ct * ct);

    let rot_dot = rotation(roll, pitch, yaw) * skew(&omega);
    let rate_dot = Matrix3::new(
        0.0,
        cf * tt * droll + sf * sec2 * dpitch,
        -sf * tt * droll + cf * sec2 * dpitch,
        0.0,
        -sf * droll,
        -cf * droll,
        0.0,
        cf / ct * droll + sf * st * sec2 * dpitch,
        -sf / ct * droll + cf * st * sec2 * dpitch,
    );
    Ok(block_diag(&rot_dot, &rate_dot))
}

/// `η̇ = J(η)ν`.
pub fn pose_rate(eta: &Pose, nu: &BodyVelocity) -> Result<Vec6, DynamicsError> {
    Ok(kinematic_transform(eta)? * nu.0)
}
