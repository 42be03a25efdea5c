//! Minimise the 12-dimensional sphere function with the particle swarm.

use rovtrack::pso::{pso_minimize, Bounds, PsoConfig};

fn main() {
    let cfg = PsoConfig { bounds: Bounds::Uniform([-10.0, 10.0]), seed: 42, ..PsoConfig::default() };
    let start = std::time::Instant::now();
    let r = pso_minimize(|x| x.iter().map(|v| v * v).sum(), 12, &cfg).unwrap();
    for (i, c) in r.history.iter().enumerate().step_by(10) {
        println!("iteration {:>3}: best {c:.3e}", i + 1);
    }
    println!("best cost {:.3e} after {} evaluations in {:.2?}", r.best_cost, r.evaluations, start.elapsed());
}
