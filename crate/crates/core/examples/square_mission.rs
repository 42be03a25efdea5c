//! Follow the 8 m square and report the planar tracking error per side.

use rovtrack::simulation::SimConfig;

fn main() {
    let sim = SimConfig::square_mission().build().unwrap();
    let corners = sim.trajectory.corner_times();
    let log = sim.run().unwrap();
    for (side, w) in corners.windows(2).enumerate() {
        let errs: Vec<f64> = log
            .rows
            .iter()
            .filter(|r| r.t >= w[0] && r.t < w[1])
            .map(|r| (r.eta[0] - r.eta_d[0]).hypot(r.eta[1] - r.eta_d[1]))
            .collect();
        let max = errs.iter().copied().fold(0.0, f64::max);
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        println!("side {} ({:>5.1}-{:>5.1} s): mean {:.5} m, max {:.5} m", side + 1, w[0], w[1], mean, max);
    }
    let last = log.rows.last().unwrap();
    println!("end of mission at t = {} s, position {:.4?}", last.t, &last.eta[..3]);
}
