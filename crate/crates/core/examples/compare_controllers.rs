//! The same scenario with no adaptation, constant rates, fuzzy rates and a
//! controller that is handed the true disturbance.

use rovtrack::controller::AdaptationMode;
use rovtrack::simulation::{metrics, Simulation};

fn main() {
    println!("{:<9} {:>12} {:>10} {:>40}", "mode", "XY err [m]", "cost", "|estimate - true| (final 10 s)");
    for mode in [AdaptationMode::Baseline, AdaptationMode::Constant, AdaptationMode::Fuzzy, AdaptationMode::Oracle] {
        let log = Simulation::standard().with_mode(mode).run().unwrap();
        let m = metrics(&log).unwrap();
        let est: Vec<String> = m.final_estimation_error.iter().map(|v| format!("{v:.3}")).collect();
        println!("{:<9} {:>12.5} {:>10.2} {:>40}", mode.to_string(), m.final_xy_error, m.cost, est.join(" "));
    }
}
