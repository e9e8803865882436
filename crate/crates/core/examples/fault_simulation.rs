//! Three-phase fault at bus 16 with and without storage, scored against the
//! voltage recovery criteria.

use bess_siting::dynsim::{Contingency, SimConfig, Simulator};
use bess_siting::netcase::new_england_39;
use bess_siting::powerflow::{solve_power_flow, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bess_siting::vsi::{check_criteria, severity_index, CriteriaConfig};

fn main() -> bess_siting::Result<()> {
    let case = new_england_39();
    let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let fault = Contingency::bus_fault(16);
    let sim = SimConfig::default();
    let crit = CriteriaConfig::default();

    for placement in [vec![], vec![34, 35, 36]] {
        let traj = Simulator::new(&case, &pf, &placement, &fault, &sim)?.run()?;
        let mask = check_criteria(&traj, &pf.v_mag, &crit, &case, fault.t_clear)?;
        let si = severity_index(&traj, &pf.v_mag, &mask)?;
        let worst = (0..traj.n_buses())
            .map(|j| (case.buses[j].id, traj.v_mag.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        println!("storage at {placement:?}");
        println!("  violated samples {}, buses {:?}", mask.total(), mask.violated_buses());
        println!("  lowest voltage {:.3} pu at bus {}, severity index {si:.5}", worst.1, worst.0);
    }
    Ok(())
}
