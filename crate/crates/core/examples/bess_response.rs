//! Battery response to a sustained under-frequency: droop, first-order lag,
//! and what happens when the state of charge reaches its floor.

use bess_siting::bess::{self, BessState};
use bess_siting::netcase::{new_england_39, BessSpec};

fn main() {
    let template = new_england_39().bess_template;
    // A deliberately small battery so the floor is reached within seconds.
    let spec = BessSpec { e_total: 0.02, ..template };
    let delta_f = -0.05;
    let dt = 0.01;
    let mut st = BessState::initial(&spec);
    println!("p_ref {:.3} pu, lag {} s, usable energy {:.3} pu.s", bess::reference_power(delta_f, &spec), spec.t_es, spec.e_pu_s());
    println!("{:>6} {:>8} {:>8}", "t", "p_es", "soc");
    for k in 0..=400 {
        if k % 25 == 0 {
            println!("{:>6.2} {:>8.4} {:>8.4}", k as f64 * dt, st.p_es, st.soc);
        }
        st = bess::step(st, delta_f, dt, &spec);
    }
}
