//! Inspect the BlueROV2 Heavy model: inertia, Coriolis, damping and
//! restoring terms at a sample state, plus the free response from a push.

use rovtrack::dynamics::{
    coriolis_matrix, damping_matrix, kinematic_transform, BodyVelocity, Pose, Vec6, Vehicle, Wrench,
};

fn main() {
    let vehicle = Vehicle::bluerov2_heavy();
    let p = vehicle.params();
    println!("weight {:.2} N, buoyancy {:.2} N", p.weight(), p.buoyancy());
    println!("M diagonal: {:.4}", vehicle.mass().diagonal().transpose());

    let eta = Pose(Vec6::new(1.0, -0.5, 2.0, 0.1, -0.2, 0.8));
    let nu = BodyVelocity(Vec6::new(0.3, -0.1, 0.05, 0.02, -0.04, 0.1));
    let c = coriolis_matrix(p, &nu);
    println!("max |C + C^T| = {:.2e}", (c + c.transpose()).abs().max());
    println!("D diagonal: {:.3}", damping_matrix(p, &nu).diagonal().transpose());
    println!("g(eta): {:.4}", vehicle.restoring(&eta).transpose());
    let j = kinematic_transform(&eta).unwrap();
    println!("eta_dot = J nu: {:.4}", (j * nu.0).transpose());

    // free response: the vehicle is released with a surge velocity and coasts
    let (mut eta, mut nu) = (Pose::default(), BodyVelocity(Vec6::new(0.5, 0.0, 0.0, 0.0, 0.0, 0.0)));
    let dt = 0.01;
    for step in 0..=500 {
        if step % 100 == 0 {
            println!("t = {:>4.1} s  x = {:.4} m  u = {:.4} m/s", step as f64 * dt, eta.0[0], nu.0[0]);
        }
        let (deta, dnu) = vehicle.state_derivative(&eta, &nu, &Wrench::default(), &Wrench::default()).unwrap();
        eta.0 += deta * dt;
        nu.0 += dnu * dt;
    }
}
