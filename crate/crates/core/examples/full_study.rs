//! End-to-end placement study. Writes every CSV and report.json into the
//! directory given as the first argument (default `study_out`).

use bess_siting::study::{run_placement_study, StudyConfig};

fn main() -> bess_siting::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "study_out".into());
    let report = run_placement_study(StudyConfig { out_dir: out.clone().into(), ..StudyConfig::default() })?;
    println!("top contingencies {:?}", report.top_contingencies.iter().map(|r| r.fault_bus).collect::<Vec<_>>());
    for opt in [Some(&report.ce), report.pso.as_ref()].into_iter().flatten() {
        println!(
            "{}: buses {:?}, VSI {:.4e}, converged at iteration {} of {}",
            opt.method, opt.siting_buses, opt.vsi, opt.iterations_to_convergence, opt.iterations_run
        );
    }
    for col in &report.comparison.columns {
        println!("{:>7}: {} buses violate the criteria", col.label, col.violated_buses.len());
    }
    println!("artifacts in {out}, {:.0} s", report.wall_time_s);
    Ok(())
}
