//! Solve the bundled 39-bus case and print the bus voltages.

use bess_siting::netcase::new_england_39;
use bess_siting::powerflow::{solve_power_flow, DEFAULT_MAX_ITER, DEFAULT_TOL};

fn main() -> bess_siting::Result<()> {
    let case = new_england_39();
    let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!("converged in {} iterations, mismatch {:.2e} pu", pf.iterations, pf.max_mismatch);
    println!("{:>4} {:>8} {:>9} {:>9} {:>9}", "bus", "|V|", "angle", "P", "Q");
    for (i, b) in case.buses.iter().enumerate() {
        println!(
            "{:>4} {:>8.4} {:>9.3} {:>9.4} {:>9.4}",
            b.id,
            pf.v_mag[i],
            pf.v_ang[i].to_degrees(),
            pf.p_inj[i],
            pf.q_inj[i]
        );
    }
    let losses: f64 = pf.p_inj.iter().sum();
    println!("active losses {:.4} pu", losses);
    Ok(())
}
