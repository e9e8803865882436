//! Cross-entropy against particle swarm on the real objective, equal budget
//! of 200 placement evaluations each.

use bess_siting::optim::PSOParams;
use bess_siting::study::{Prepared, StudyConfig};
use std::time::Instant;

fn main() -> bess_siting::Result<()> {
    let cfg = StudyConfig { pso: PSOParams { swarm_size: 20, max_iter: 10, ..PSOParams::default() }, ..StudyConfig::default() };
    let mut prep = Prepared::new(cfg)?;
    for seed in 0..3 {
        prep.config.seed = seed;
        let t = Instant::now();
        let ce = prep.run_ce()?;
        let ce_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let pso = prep.run_pso()?;
        let pso_s = t.elapsed().as_secs_f64();
        let ce_buses = ce.state.best_placement.as_ref().map(|p| p.bus_ids(&prep.candidates)).unwrap_or_default();
        println!(
            "seed {seed}: CE {:?} {:.4e} (iter {}, {ce_s:.1} s)  PSO {:?} {:.4e} (iter {}, {pso_s:.1} s)",
            ce_buses,
            ce.state.best_value,
            ce.converged_iter,
            pso.best_placement.bus_ids(&prep.candidates),
            pso.best_value,
            pso.converged_iter
        );
    }
    Ok(())
}
