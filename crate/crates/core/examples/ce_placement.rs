//! Cross-entropy search for three storage sites against the five most severe
//! contingencies, printing the sampling distribution as it sharpens.

use bess_siting::study::{Prepared, StudyConfig};

fn main() -> bess_siting::Result<()> {
    let prep = Prepared::new(StudyConfig::default())?;
    let out = prep.run_ce()?;
    for row in &out.trace {
        let mut top: Vec<(u32, f64)> = prep.candidates.iter().copied().zip(row.p.iter().copied()).collect();
        top.sort_by(|a, b| b.1.total_cmp(&a.1));
        let lead: Vec<String> = top.iter().take(5).map(|(b, p)| format!("{b}:{p:.2}")).collect();
        println!("iter {:>2}  best {:.4e}  gamma {:.4e}  {}", row.iter, row.best_value, row.gamma, lead.join(" "));
    }
    let best = out.state.best_placement.expect("evaluated at least once");
    println!(
        "placement {:?}, VSI {:.4e}, found at iteration {}, {} evaluations",
        best.bus_ids(&prep.candidates),
        out.state.best_value,
        out.converged_iter,
        out.evaluations
    );
    Ok(())
}
