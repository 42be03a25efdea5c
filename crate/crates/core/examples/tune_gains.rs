//! Tune the controller gains with a deliberately small swarm and compare the
//! result against the stock gains on the full 60 s scenario.
//!
//! cargo run --release --example tune_gains [-- path/to/tuning.json]

use rovtrack::controller::Gains;
use rovtrack::pso::{tune_gains, TuningConfig};
use rovtrack::simulation::Simulation;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tuning_quick.json").into());
    let (cfg, scenario) = TuningConfig::from_path(path.as_ref()).unwrap_or_else(|e| panic!("{e}"));
    let sim = scenario.build().unwrap();
    println!("swarm {} x {} iterations on a {} s horizon", cfg.pso.n, cfg.pso.iters, sim.tf);
    let (gains, result) = tune_gains(&sim, &cfg.pso).unwrap();
    println!("best tuning cost {:.4}", result.best_cost);
    println!("k1 = {:.3?}", gains.k1);
    println!("k2 = {:.3?}", gains.k2);

    let full = Simulation::standard();
    let tuned = full.clone().with_gains(gains).run_cost().unwrap();
    let stock = full.with_gains(Gains::TUNED).run_cost().unwrap();
    println!("60 s cost: tuned {tuned:.3}, stock {stock:.3}");
}
