//! Both optimizers on a cheap additive objective whose optimum is known by
//! enumeration. Useful for tuning search parameters before paying for
//! simulations.

use bess_siting::optim::{brute_force, ce_optimize, pso_optimize, CEParams, PSOParams, Placement};
use rand::{Rng, SeedableRng};

fn main() -> bess_siting::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let w: Vec<f64> = (0..39).map(|_| rng.gen()).collect();
    let obj = |p: &Placement| Ok(p.indices().iter().map(|&i| w[i]).sum::<f64>());
    let (best, value) = brute_force(obj, 39, 3)?;
    println!("optimum {:?} = {value:.4}", best.indices());

    let seeds = 20;
    let (mut ce_hits, mut pso_hits) = (0, 0);
    for seed in 0..seeds {
        let ce = ce_optimize(obj, &CEParams { seed, ..CEParams::default() }, 39, 3)?;
        let pso = pso_optimize(obj, &PSOParams { seed, ..PSOParams::default() }, 39, 3)?;
        ce_hits += (ce.state.best_placement.as_ref() == Some(&best)) as u32;
        pso_hits += (pso.best_placement == best) as u32;
    }
    println!("CE hit the optimum on {ce_hits}/{seeds} seeds, PSO on {pso_hits}/{seeds}");
    Ok(())
}
