//! Bus admittance matrix and Newton-Raphson AC power flow (polar form).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netcase::{BusKind, NetworkCase};

/// Dense complex admittance matrix indexed by bus position in the case.
pub type Admittance = DMatrix<Complex64>;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 20;

/// Builds the bus admittance matrix: series branches with off-nominal taps
/// on the from side, line charging and bus shunts. Out-of-service branches
/// contribute nothing.
pub fn build_ybus(case: &NetworkCase) -> Admittance {
    let n = case.n_buses();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for br in case.branches.iter().filter(|b| b.in_service) {
        let f = case.bus_index(br.from_bus).expect("validated");
        let t = case.bus_index(br.to_bus).expect("validated");
        let ys = Complex64::new(br.r, br.x).inv();
        let ych = Complex64::new(0.0, br.b_shunt / 2.0);
        let tap = br.tap_ratio;
        y[(f, f)] += (ys + ych) / (tap * tap);
        y[(t, t)] += ys + ych;
        y[(f, t)] -= ys / tap;
        y[(t, f)] -= ys / tap;
    }
    for (i, b) in case.buses.iter().enumerate() {
        y[(i, i)] += Complex64::new(b.shunt_g, b.shunt_b);
    }
    y
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerFlowSolution {
    pub v_mag: Vec<f64>,
    /// Radians, slack bus at zero.
    pub v_ang: Vec<f64>,
    /// Per generator, in the case's generator order.
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    /// Net injections per bus.
    pub p_inj: Vec<f64>,
    pub q_inj: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl PowerFlowSolution {
    pub fn voltage(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.v_mag[i], self.v_ang[i])
    }

    /// Series and shunt losses: total injection.
    pub fn losses(&self) -> f64 {
        self.p_inj.iter().sum()
    }
}

fn injections(y: &Admittance, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = vm.len();
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let mut current = Complex64::new(0.0, 0.0);
        for k in 0..n {
            current += y[(i, k)] * v[k];
        }
        let s = v[i] * current.conj();
        p[i] = s.re;
        q[i] = s.im;
    }
    (p, q)
}

/// Newton-Raphson power flow from a flat start (PV and slack buses start at
/// their setpoint magnitude). Reactive limits are not enforced.
pub fn solve_power_flow(case: &NetworkCase, tol: f64, max_iter: usize) -> Result<PowerFlowSolution> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("power flow tolerance must be positive, got {tol}")));
    }
    let n = case.n_buses();
    let y = build_ybus(case);

    let mut p_sched = vec![0.0; n];
    let mut q_sched = vec![0.0; n];
    for (i, b) in case.buses.iter().enumerate() {
        p_sched[i] -= b.p_load;
        q_sched[i] -= b.q_load;
    }
    for g in &case.generators {
        let i = case.bus_index(g.bus).expect("validated");
        p_sched[i] += g.p_gen;
    }

    let mut vm: Vec<f64> = case.buses.iter().map(|b| b.v_setpoint.unwrap_or(1.0)).collect();
    let mut va = vec![0.0; n];

    let pvpq: Vec<usize> = (0..n).filter(|&i| case.buses[i].kind != BusKind::Slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| case.buses[i].kind == BusKind::Pq).collect();
    let (npvpq, npq) = (pvpq.len(), pq.len());
    let dim = npvpq + npq;

    let mismatch = |vm: &[f64], va: &[f64]| -> DVector<f64> {
        let (p, q) = injections(&y, vm, va);
        let mut f = DVector::zeros(dim);
        for (r, &i) in pvpq.iter().enumerate() {
            f[r] = p[i] - p_sched[i];
        }
        for (r, &i) in pq.iter().enumerate() {
            f[npvpq + r] = q[i] - q_sched[i];
        }
        f
    };

    let mut f = mismatch(&vm, &va);
    let mut norm = f.amax();
    let mut history = vec![norm];
    let mut iterations = 0;

    while norm >= tol {
        if iterations == max_iter {
            return Err(Error::PowerFlowDiverged { iterations, history });
        }
        let jac = jacobian(&y, &vm, &va, &pvpq, &pq);
        let dx = jac
            .lu()
            .solve(&(-&f))
            .ok_or_else(|| Error::PowerFlowDiverged { iterations, history: history.clone() })?;
        for (r, &i) in pvpq.iter().enumerate() {
            va[i] += dx[r];
        }
        for (r, &i) in pq.iter().enumerate() {
            vm[i] += dx[npvpq + r];
        }
        iterations += 1;
        f = mismatch(&vm, &va);
        norm = f.amax();
        if !norm.is_finite() {
            history.push(norm);
            return Err(Error::PowerFlowDiverged { iterations, history });
        }
        history.push(norm);
    }

    let (p_inj, q_inj) = injections(&y, &vm, &va);
    let (p_gen, q_gen) = case
        .generators
        .iter()
        .map(|g| {
            let i = case.bus_index(g.bus).expect("validated");
            let b = &case.buses[i];
            (p_inj[i] + b.p_load, q_inj[i] + b.q_load)
        })
        .unzip();

    Ok(PowerFlowSolution {
        v_mag: vm,
        v_ang: va,
        p_gen,
        q_gen,
        p_inj,
        q_inj,
        converged: true,
        iterations,
        max_mismatch: norm,
    })
}

/// Polar Jacobian of (P over pv+pq, Q over pq) w.r.t. (angle over pv+pq,
/// magnitude over pq).
fn jacobian(y: &Admittance, vm: &[f64], va: &[f64], pvpq: &[usize], pq: &[usize]) -> DMatrix<f64> {
    let n = vm.len();
    let (p, q) = injections(y, vm, va);
    let mut pos_a = vec![usize::MAX; n];
    let mut pos_m = vec![usize::MAX; n];
    for (r, &i) in pvpq.iter().enumerate() {
        pos_a[i] = r;
    }
    for (r, &i) in pq.iter().enumerate() {
        pos_m[i] = pvpq.len() + r;
    }
    let dim = pvpq.len() + pq.len();
    let mut jac = DMatrix::zeros(dim, dim);

    for i in 0..n {
        let (ra, rm) = (pos_a[i], pos_m[i]);
        if ra == usize::MAX {
            continue;
        }
        for k in 0..n {
            let yik = y[(i, k)];
            if yik.norm_sqr() == 0.0 {
                continue;
            }
            let (g, b) = (yik.re, yik.im);
            let (ca, cm) = (pos_a[k], pos_m[k]);
            if i == k {
                let vi2 = vm[i] * vm[i];
                let dp_da = -q[i] - b * vi2;
                let dp_dm = p[i] / vm[i] + g * vm[i];
                let dq_da = p[i] - g * vi2;
                let dq_dm = q[i] / vm[i] - b * vm[i];
                jac[(ra, ca)] = dp_da;
                if cm != usize::MAX {
                    jac[(ra, cm)] = dp_dm;
                }
                if rm != usize::MAX {
                    jac[(rm, ca)] = dq_da;
                    if cm != usize::MAX {
                        jac[(rm, cm)] = dq_dm;
                    }
                }
            } else {
                let th = va[i] - va[k];
                let (s, c) = th.sin_cos();
                let vv = vm[i] * vm[k];
                let dp_da = vv * (g * s - b * c);
                let dq_da = -vv * (g * c + b * s);
                let dp_dm = vm[i] * (g * c + b * s);
                let dq_dm = vm[i] * (g * s - b * c);
                if ca != usize::MAX {
                    jac[(ra, ca)] = dp_da;
                    if rm != usize::MAX {
                        jac[(rm, ca)] = dq_da;
                    }
                }
                if cm != usize::MAX {
                    jac[(ra, cm)] = dp_dm;
                    if rm != usize::MAX {
                        jac[(rm, cm)] = dq_dm;
                    }
                }
            }
        }
    }
    jac
}
