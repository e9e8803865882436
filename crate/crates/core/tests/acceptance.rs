//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use bess_siting::bess::{self, BessState};
use bess_siting::dynsim::{simulate, Contingency, SimConfig, Simulator, Trajectory};
use bess_siting::netcase::new_england_39;
use bess_siting::optim::{brute_force, ce_optimize, CEParams, PSOParams, Placement};
use bess_siting::powerflow::{solve_power_flow, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bess_siting::study::{run_placement_study, Prepared, StudyConfig};
use bess_siting::vsi::{check_criteria, severity_index, vsi_placement, ContingencyResult, CriteriaConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn power_flow() -> Outcome {
    let t = Instant::now();
    let pf = solve_power_flow(&new_england_39(), DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let small = common::three_bus();
    let pf3 = solve_power_flow(&small, 1e-12, 20).map_err(|e| e.to_string())?;
    let (vm, va) = common::gauss_seidel(&small);
    let gap = (0..3).map(|i| (pf3.v_mag[i] - vm[i]).abs().max((pf3.v_ang[i] - va[i]).abs())).fold(0.0, f64::max);
    check(
        pf.converged && pf.iterations <= 10 && pf.max_mismatch < 1e-6 && gap < 1e-8 && secs < 1.0,
        format!(
            "39-bus: {} iterations, mismatch {:.2e} pu, {:.1} ms; 3-bus vs Gauss-Seidel max gap {:.2e}",
            pf.iterations,
            pf.max_mismatch,
            secs * 1e3,
            gap
        ),
    )
}

fn flat_run() -> Outcome {
    let case = new_england_39();
    let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let traj = Simulator::new(&case, &pf, &[], &Contingency::none(1), &SimConfig::default())
        .and_then(|s| s.run())
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let drift = traj
        .v_mag
        .iter()
        .flat_map(|row| row.iter().zip(&traj.v_mag[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    check(drift < 1e-3 && secs < 1.0, format!("max drift {drift:.2e} pu over {} s, {:.0} ms", traj.times[traj.len() - 1], secs * 1e3))
}

fn bess_model() -> Outcome {
    let case = new_england_39();
    let spec = case.bess_template.clone();

    let n = 16;
    let mut st = BessState::initial(&spec);
    for _ in 0..n {
        st = bess::advance(st, 0.4, spec.t_es / n as f64, &spec);
    }
    let step_err = (st.p_es - 0.4 * (1.0 - (-1.0f64).exp())).abs();

    let mut energy_err: f64 = 0.0;
    for (bus, placement) in [(16, vec![34, 35, 36]), (4, vec![3, 4, 5]), (26, vec![25, 26, 29])] {
        let traj = simulate(&case, &placement, &Contingency::bus_fault(bus), &SimConfig::default()).map_err(|e| e.to_string())?;
        energy_err = energy_err.max(energy_mismatch(&traj, spec.e_pu_s()));
    }

    // Adversarial frequency sequences against a small battery so the SOC
    // limits are hit repeatedly.
    let small = bess_siting::netcase::BessSpec { e_total: 0.05, ..spec.clone() };
    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    let strategy = (
        proptest::collection::vec((-0.3f64..0.3, 1usize..80), 1..12),
        0.2f64..=0.8,
        prop_oneof![Just(0.001), Just(0.005), Just(0.02), Just(0.1)],
    );
    let bounded = runner
        .run(&strategy, |(segments, soc0, dt)| {
            let mut st = BessState { p_es: 0.0, soc: soc0 };
            for (df, len) in segments {
                for _ in 0..len {
                    st = bess::step(st, df, dt, &small);
                    prop_assert!(st.soc >= small.soc_min && st.soc <= small.soc_max, "soc {}", st.soc);
                    prop_assert!(st.p_es.abs() <= small.p_max);
                }
            }
            Ok(())
        })
        .is_ok();

    check(
        step_err < 1e-9 && energy_err < 1e-6 && bounded,
        format!(
            "step response error {step_err:.1e}; SOC-energy mismatch {energy_err:.1e} pu.s; SOC bounded over 10000 adversarial sequences: {bounded}"
        ),
    )
}

fn energy_mismatch(traj: &Trajectory, e_pu_s: f64) -> f64 {
    let dt = traj.times[1] - traj.times[0];
    (0..traj.bess_buses.len())
        .map(|u| {
            let integral: f64 = traj.bess_p.windows(2).map(|w| 0.5 * (w[0][u] + w[1][u]) * dt).sum();
            let dsoc = traj.bess_soc[traj.len() - 1][u] - traj.bess_soc[0][u];
            (-dsoc * e_pu_s - integral).abs()
        })
        .fold(0.0, f64::max)
}

fn index_chain() -> Outcome {
    let case = common::micro_case();
    let crit = CriteriaConfig { post_transient_window: 0.05, ..CriteriaConfig::default() };
    let mut results = Vec::new();
    for (k, rows) in common::MICRO_OLD.iter().enumerate() {
        let baseline = common::micro_traj(0.1, rows);
        let mask = check_criteria(&baseline, &common::MICRO_V0, &crit, &case, 0.0).map_err(|e| e.to_string())?;
        let si = severity_index(&baseline, &common::MICRO_V0, &mask).map_err(|e| e.to_string())?;
        let contingency = Contingency { t_clear: 0.0, ..Contingency::bus_fault(k as u32 + 1) };
        results.push(ContingencyResult { contingency, si, baseline, mask });
    }
    let new: Vec<_> = common::MICRO_NEW.iter().map(|r| common::micro_traj(0.1, r)).collect();
    let vsi = vsi_placement(&new, &results, 30.0).map_err(|e| e.to_string())?;
    let si = common::micro_oracle_si();
    let err = (results[0].si - si[0]).abs().max((results[1].si - si[1]).abs()).max((vsi - common::micro_oracle_vsi()).abs());
    check(err < 1e-12, format!("SI = ({:.6}, {:.6}), VSI = {:.6e}; max error vs hand oracle {err:.1e}", results[0].si, results[1].si, vsi))
}

fn ce_surrogate() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let w: Vec<f64> = (0..39).map(|_| rng.gen::<f64>()).collect();
    let obj = |p: &Placement| Ok(p.indices().iter().map(|&i| w[i]).sum::<f64>());
    let t = Instant::now();
    let (best, _) = brute_force(obj, 39, 3).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for seed in 0..100 {
        let out = ce_optimize(obj, &CEParams { seed, ..CEParams::default() }, 39, 3).map_err(|e| e.to_string())?;
        if out.state.best_placement.as_ref() == Some(&best) {
            hits += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(hits >= 95 && secs < 10.0, format!("optimum found on {hits}/100 seeds (need 95), {secs:.2} s"))
}

fn paper_trends() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = run_placement_study(StudyConfig { out_dir: dir.path().to_path_buf(), ..StudyConfig::default() }).map_err(|e| e.to_string())?;
    let study_secs = t.elapsed().as_secs_f64();
    let cmp = &report.comparison;
    let col = |l: &str| cmp.column(l).ok_or_else(|| format!("missing column {l}"));
    let (nob, pso, ce) = (col("nobess")?, col("pso")?, col("ce")?);

    let a = report.verify_fault_bus == 16 && !nob.violated_buses.is_empty();
    let snap = |c: &bess_siting::study::ScenarioColumn| (c.above_high.len(), c.between.len(), c.criteria_violations_at_snapshot.len());
    let (sn, sp, sc) = (snap(nob), snap(pso), snap(ce));
    let b = sc.0 <= sp.0 && sp.0 <= sn.0 && sc.1 <= sp.1 && sp.1 <= sn.1 && sc.2 <= sp.2 && sp.2 <= sn.2;

    // Matched budgets: both optimizers get 20 evaluations per iteration for
    // 10 iterations.
    let prep_cfg = StudyConfig { pso: PSOParams { swarm_size: 20, max_iter: 10, ..PSOParams::default() }, ..StudyConfig::default() };
    let mut prep = Prepared::new(prep_cfg).map_err(|e| e.to_string())?;
    let (mut ce_iters, mut pso_iters, mut wins) = (Vec::new(), Vec::new(), 0);
    for seed in 0..10 {
        prep.config.seed = seed;
        let c = prep.run_ce().map_err(|e| e.to_string())?;
        let p = prep.run_pso().map_err(|e| e.to_string())?;
        ce_iters.push(c.converged_iter);
        pso_iters.push(p.converged_iter);
        if c.state.best_value >= p.best_value {
            wins += 1;
        }
    }
    let mean = |v: &[usize]| v.iter().sum::<usize>() as f64 / v.len() as f64;
    let c_ok = mean(&ce_iters) <= mean(&pso_iters);
    let d = wins >= 8;
    let runtime = study_secs < 900.0;

    check(
        a && b && c_ok && d && runtime,
        format!(
            "(a) no-BESS bus-16 violated buses {} [{}]; (b) snapshot counts >{}/({},{}]/criteria: no-BESS {:?}, PSO {:?}, CE {:?}; whole-run violated buses {}/{}/{} [{}]; \
             (c) iterations to convergence CE {:?} mean {:.1} vs PSO {:?} mean {:.1} [{}]; (d) CE >= PSO on {wins}/10 seeds [{}]; full study {study_secs:.0} s [{}]",
            nob.violated_buses.len(),
            pass(a),
            cmp.overshoot_high,
            cmp.overshoot_low,
            cmp.overshoot_high,
            sn,
            sp,
            sc,
            nob.violated_buses.len(),
            pso.violated_buses.len(),
            ce.violated_buses.len(),
            pass(b),
            ce_iters,
            mean(&ce_iters),
            pso_iters,
            mean(&pso_iters),
            pass(c_ok),
            pass(d),
            pass(runtime),
        ),
    )
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn determinism() -> Outcome {
    let cfg = |dir: &std::path::Path| StudyConfig {
        out_dir: dir.to_path_buf(),
        seed: 11,
        ce: CEParams { max_iter: 3, ..CEParams::default() },
        pso: PSOParams { swarm_size: 10, max_iter: 3, ..PSOParams::default() },
        ..StudyConfig::default()
    };
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for (dir, workers) in dirs.iter().zip([1, 4]) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| e.to_string())?;
        pool.install(|| run_placement_study(cfg(dir.path()))).map_err(|e| e.to_string())?;
    }
    let list = |d: &std::path::Path| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        v.sort();
        v
    };
    let names = list(dirs[0].path());
    let same_set = names == list(dirs[1].path());
    let differing: Vec<&String> = names
        .iter()
        .filter(|n| std::fs::read(dirs[0].path().join(n)).ok() != std::fs::read(dirs[1].path().join(n)).ok())
        .collect();
    check(same_set && differing.is_empty(), format!("{} CSV files compared across 1 and 4 workers, {} differ", names.len(), differing.len()))
}

fn step_halving() -> Outcome {
    let case = new_england_39();
    let c = Contingency::bus_fault(16);
    let coarse = SimConfig::default();
    let fine = SimConfig { dt: coarse.dt / 2.0, ..coarse };
    let mut worst: f64 = 0.0;
    for placement in [vec![], vec![34, 35, 36]] {
        let a = simulate(&case, &placement, &c, &coarse).map_err(|e| e.to_string())?;
        let b = simulate(&case, &placement, &c, &fine).map_err(|e| e.to_string())?;
        for k in 0..a.len() {
            for j in 0..a.n_buses() {
                worst = worst.max((a.v_mag[k][j] - b.v_mag[2 * k][j]).abs());
            }
        }
    }
    check(worst < 1e-3, format!("max voltage change {worst:.2e} pu (no BESS and BESS at 34/35/36)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("power flow", power_flow),
        ("flat-run stability", flat_run),
        ("BESS model", bess_model),
        ("index chain", index_chain),
        ("CE correctness", ce_surrogate),
        ("paper trends", paper_trends),
        ("determinism", determinism),
        ("step-halving", step_halving),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {} {tag} {name}: {detail} ({secs:.1} s)", i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
