//! Station keeping while the disturbance switches twice; prints how the
//! estimate follows each step.

use rovtrack::simulation::{metrics_with_window, SimConfig, SimLog};

fn mean_estimate(log: &SimLog, from: f64, to: f64) -> [f64; 6] {
    let rows: Vec<_> = log.rows.iter().filter(|r| r.t >= from && r.t < to).collect();
    let mut m = [0.0; 6];
    for r in &rows {
        for i in 0..6 {
            m[i] += r.tau_hat[i] / rows.len() as f64;
        }
    }
    m
}

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/disturbance_steps.json");
    let sim = SimConfig::from_path(path.as_ref()).unwrap().build().unwrap();
    let log = sim.run().unwrap();
    for (from, to) in [(0.0, 5.0), (30.0, 40.0), (70.0, 80.0)] {
        println!("t in [{from:>4}, {to:>4}) s");
        println!("  true     {:.3?}", sim.disturbance.at(from).0.as_slice());
        println!("  estimate {:.3?}", mean_estimate(&log, from, to));
    }
    let m = metrics_with_window(&log, 10.0).unwrap();
    println!("final-window position error {:.3?}", m.final_error);
}
