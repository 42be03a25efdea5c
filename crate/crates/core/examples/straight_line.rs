//! Run the straight-line transit under a constant disturbance and report the
//! tracking and estimation figures. An optional argument names a scenario
//! document to run instead.
//!
//! cargo run --release --example straight_line [-- path/to/scenario.json]

use rovtrack::simulation::{metrics, SimConfig};

fn main() {
    let cfg = match std::env::args().nth(1) {
        Some(path) => SimConfig::from_path(path.as_ref()).unwrap_or_else(|e| panic!("{e}")),
        None => SimConfig::default(),
    };
    let sim = cfg.build().unwrap_or_else(|e| panic!("{e}"));
    let log = sim.run().unwrap();
    let m = metrics(&log).unwrap();
    println!("{} rows over {} s ({} adaptation)", m.rows, m.duration, sim.adaptation.mode);
    println!("final-window mean |e|: {:.5?}", m.final_error);
    println!("final-window XY error: {:.5} m", m.final_xy_error);
    println!("heave oscillation half-amplitude: {:.5} m", m.z_amplitude);
    println!("estimate (final-window mean): {:.4?}", m.final_estimate);
    println!("true disturbance:             {:.4?}", log.rows.last().unwrap().tau_d);
    println!("cost: {:.3}", m.cost);
}
