use bess_siting::optim::*;
use rand::{Rng, SeedableRng};

fn weights(seed: u64) -> Vec<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..39).map(|_| rng.gen::<f64>()).collect()
}

#[test]
fn brute_force_counts_every_triple() {
    let n = std::cell::Cell::new(0usize);
    let count = |_: &Placement| {
        n.set(n.get() + 1);
        Ok(0.0)
    };
    brute_force(count, 39, 3).unwrap();
    assert_eq!(n.get(), 9139);
}

#[test]
fn brute_force_finds_top_weights() {
    let w = weights(1);
    let (best, _) = brute_force(|p: &Placement| Ok(p.indices().iter().map(|&i| w[i]).sum()), 39, 3).unwrap();
    let mut order: Vec<usize> = (0..39).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    let mut top = order[..3].to_vec();
    top.sort();
    assert_eq!(best.indices(), top);
}

#[test]
fn pso_recovers_surrogate_optimum_on_most_seeds() {
    let w = weights(1);
    let obj = |p: &Placement| Ok(p.indices().iter().map(|&i| w[i]).sum::<f64>());
    let (best, _) = brute_force(obj, 39, 3).unwrap();
    let hits = (0..100)
        .filter(|&s| pso_optimize(obj, &PSOParams { seed: s, ..PSOParams::default() }, 39, 3).unwrap().best_placement == best)
        .count();
    assert!(hits >= 95, "PSO found the optimum on {hits}/100 seeds");
}

#[test]
fn identical_seed_gives_identical_traces() {
    let w = weights(2);
    let obj = |p: &Placement| Ok(p.indices().iter().map(|&i| w[i]).sum::<f64>());
    let a = pso_optimize(obj, &PSOParams { seed: 4, ..PSOParams::default() }, 39, 3).unwrap();
    let b = pso_optimize(obj, &PSOParams { seed: 4, ..PSOParams::default() }, 39, 3).unwrap();
    assert_eq!(a.trace, b.trace);
    let c = ce_optimize(obj, &CEParams { seed: 4, ..CEParams::default() }, 39, 3).unwrap();
    let d = ce_optimize(obj, &CEParams { seed: 4, ..CEParams::default() }, 39, 3).unwrap();
    assert_eq!(c, d);
}

#[test]
fn every_evaluated_placement_is_feasible() {
    let obj = |p: &Placement| {
        assert_eq!(p.count(), 3);
        Ok(p.indices().iter().map(|&i| (i as f64).sqrt()).sum::<f64>())
    };
    ce_optimize(obj, &CEParams::default(), 39, 3).unwrap();
    pso_optimize(obj, &PSOParams::default(), 39, 3).unwrap();
}
