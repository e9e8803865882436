#![allow(dead_code)]

use bess_siting::dynsim::Trajectory;
use bess_siting::netcase::{parse_case, NetworkCase};
use num_complex::Complex64;

/// Slack, PV and PQ bus in a triangle.
pub const THREE_BUS: &str = r#"{
    "system": {"mva_base": 100, "nominal_hz": 60},
    "buses": [
        {"id": 1, "kind": "slack", "base_kv": 138, "v_setpoint": 1.02, "is_generator_bus": true},
        {"id": 2, "kind": "pv", "base_kv": 138, "v_setpoint": 1.01, "is_generator_bus": true},
        {"id": 3, "kind": "pq", "base_kv": 138, "p_load": 50, "q_load": 20}
    ],
    "branches": [
        {"from_bus": 1, "to_bus": 2, "r": 0.02, "x": 0.06, "b_shunt": 0.03},
        {"from_bus": 1, "to_bus": 3, "r": 0.08, "x": 0.24, "b_shunt": 0.025},
        {"from_bus": 2, "to_bus": 3, "r": 0.06, "x": 0.18, "b_shunt": 0.02, "tap_ratio": 1.0}
    ],
    "generators": [
        {"bus": 1, "mva_base": 100, "p_gen": 0, "h": 5, "d": 1, "xd": 1.8, "xq": 1.7, "xd_p": 0.3, "xq_p": 0.5,
         "td0_p": 6, "tq0_p": 0.5, "avr_gain": 50, "avr_time": 0.05, "efd_min": -5, "efd_max": 5},
        {"bus": 2, "mva_base": 100, "p_gen": 30, "h": 4, "d": 1, "xd": 1.8, "xq": 1.7, "xd_p": 0.3, "xq_p": 0.5,
         "td0_p": 6, "tq0_p": 0.5, "avr_gain": 50, "avr_time": 0.05, "efd_min": -5, "efd_max": 5}
    ]
}"#;

pub fn three_bus() -> NetworkCase {
    parse_case(THREE_BUS).unwrap()
}

/// Gauss-Seidel power flow written from scratch, used only as an oracle.
/// Builds its own admittance matrix from the raw branch data.
pub fn gauss_seidel(case: &NetworkCase) -> (Vec<f64>, Vec<f64>) {
    use bess_siting::netcase::BusKind;
    let n = case.buses.len();
    let idx = |id: u32| case.buses.iter().position(|b| b.id == id).unwrap();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in case.branches.iter().filter(|b| b.in_service) {
        let (f, t) = (idx(br.from_bus), idx(br.to_bus));
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let half = Complex64::new(0.0, br.b_shunt / 2.0);
        let a = br.tap_ratio;
        y[f][f] += (ys + half) / (a * a);
        y[t][t] += ys + half;
        y[f][t] -= ys / a;
        y[t][f] -= ys / a;
    }
    for (i, b) in case.buses.iter().enumerate() {
        y[i][i] += Complex64::new(b.shunt_g, b.shunt_b);
    }
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (i, b) in case.buses.iter().enumerate() {
        p[i] -= b.p_load;
        q[i] -= b.q_load;
    }
    for g in &case.generators {
        p[idx(g.bus)] += g.p_gen;
    }
    let mut v: Vec<Complex64> = case.buses.iter().map(|b| Complex64::new(b.v_setpoint.unwrap_or(1.0), 0.0)).collect();
    for _ in 0..200_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let kind = case.buses[i].kind;
            if kind == BusKind::Slack {
                continue;
            }
            let others: Complex64 = (0..n).filter(|&k| k != i).map(|k| y[i][k] * v[k]).sum();
            let qi = if kind == BusKind::Pv { -(v[i].conj() * (y[i][i] * v[i] + others)).im } else { q[i] };
            let mut vn = (Complex64::new(p[i], -qi) / v[i].conj() - others) / y[i][i];
            if kind == BusKind::Pv {
                vn *= case.buses[i].v_setpoint.unwrap() / vn.norm();
            }
            change = change.max((vn - v[i]).norm());
            v[i] = vn;
        }
        if change < 1e-15 {
            break;
        }
    }
    (v.iter().map(|x| x.norm()).collect(), v.iter().map(|x| x.arg()).collect())
}

/// Two-bus case for index-chain checks: bus 1 hosts a generator, bus 2 a load.
pub fn micro_case() -> NetworkCase {
    parse_case(
        r#"{
        "buses": [
            {"id": 1, "kind": "slack", "base_kv": 230, "v_setpoint": 1.0, "is_generator_bus": true},
            {"id": 2, "kind": "pq", "base_kv": 230}
        ],
        "branches": [{"from_bus": 1, "to_bus": 2, "r": 0.0, "x": 0.1}]
    }"#,
    )
    .unwrap()
}

pub fn micro_traj(dt: f64, rows: &[[f64; 2]]) -> Trajectory {
    let t_len = rows.len();
    Trajectory {
        bus_ids: vec![1, 2],
        bess_buses: vec![],
        times: (0..t_len).map(|k| k as f64 * dt).collect(),
        v_mag: rows.iter().map(|r| r.to_vec()).collect(),
        delta_f: vec![vec![0.0; 2]; t_len],
        bess_p: vec![vec![]; t_len],
        bess_soc: vec![vec![]; t_len],
    }
}

pub const MICRO_V0: [f64; 2] = [1.0, 0.98];
pub const MICRO_OLD: [[[f64; 2]; 3]; 2] = [
    [[0.65, 0.70], [0.95, 0.90], [1.00, 1.04]],
    [[0.90, 0.60], [1.32, 0.97], [1.01, 0.99]],
];
pub const MICRO_NEW: [[[f64; 2]; 3]; 2] = [
    [[0.66, 0.72], [0.96, 0.93], [1.00, 1.00]],
    [[0.91, 0.65], [1.30, 0.975], [1.005, 0.985]],
];

/// Hand-worked values for the micro set with dt = 0.1 s, a 0.05 s tail
/// window and every sample post-clearing, worked through bus by bus:
///
/// scenario 1: bus 1 dips 35% at t0 (gen limit 30%); bus 2 dips 0.28/0.98
/// at t0 and ends 0.06/0.98 off in the tail (> 5%).
/// scenario 2: bus 2 dips 0.38/0.98 at t0; bus 1 overshoots 32% at t1.
pub fn micro_oracle_si() -> [f64; 2] {
    let si1 = (0.35 + 0.28 / 0.98 + 0.06 / 0.98) / 6.0;
    let si2 = (0.38 / 0.98 + 0.32) / 6.0;
    [si1, si2]
}

/// Per-bus peak improvement, averaged, over a total gain of 30, weighted by SI.
pub fn micro_oracle_vsi() -> f64 {
    let [si1, si2] = micro_oracle_si();
    let s1 = (0.01 + 0.03) / 2.0 / 30.0;
    let s2 = (0.01 + 0.05) / 2.0 / 30.0;
    si1 * s1 + si2 * s2
}
