//! Fixed-step phasor-domain simulation of a faulted grid.
//!
//! Machines use the two-axis model (`delta`, `omega`, `eq'`, `ed'`) with a
//! first-order AVR and constant mechanical power. Loads are constant
//! impedances folded into the admittance matrix along with each machine's
//! Norton admittance, so the network solve is a pre-factored linear solve
//! plus a short fixed-point loop for saliency and the constant-power BESS
//! injections. Machine equations are advanced with Heun's method
//! (trapezoidal predictor-corrector); the BESS states use their exact
//! discretization.
//!
//! Row `k` of a [`Trajectory`] holds the network solution at `k * dt` with
//! the topology that is active over `[k * dt, (k + 1) * dt)`, so a fault
//! applied at 0 s already shows in row 0 and the first post-clearing row is
//! the one at `t_clear`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DVector, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bess::{self, BessState};
use crate::error::{Error, Result};
use crate::netcase::{BessSpec, BusKind, MachineConstants, NetworkCase};
use crate::powerflow::{build_ybus, solve_power_flow, PowerFlowSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};

type Factor = LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>;

/// Shunt magnitude used for a bolted three-phase fault.
pub const BOLTED_FAULT_ADMITTANCE: f64 = 1e4;

/// Residual above which initialization is rejected.
const INIT_RESIDUAL_LIMIT: f64 = 1e-6;

/// Below this terminal voltage a BESS behaves as a constant admittance
/// instead of a constant-power source.
const BESS_CURRENT_LIMIT_VOLTAGE: f64 = 0.5;

const NETWORK_TOL: f64 = 1e-11;
const NETWORK_MAX_ITER: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contingency {
    pub fault_bus: u32,
    pub t_apply: f64,
    pub t_clear: f64,
    pub fault_admittance: f64,
}

impl Contingency {
    /// Three-phase bolted fault applied at 0 s and cleared at 0.1 s.
    pub fn bus_fault(bus: u32) -> Self {
        Self { fault_bus: bus, t_apply: 0.0, t_clear: 0.1, fault_admittance: BOLTED_FAULT_ADMITTANCE }
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.t_clear = self.t_apply + seconds;
        self
    }

    /// A zero-duration fault, i.e. an undisturbed run.
    pub fn none(bus: u32) -> Self {
        Self { fault_bus: bus, t_apply: 0.0, t_clear: 0.0, fault_admittance: BOLTED_FAULT_ADMITTANCE }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_apply >= 0.0 && self.t_clear >= self.t_apply) {
            return Err(Error::Config(format!(
                "contingency at bus {} needs 0 <= t_apply <= t_clear (got {} / {})",
                self.fault_bus, self.t_apply, self.t_clear
            )));
        }
        if !(self.fault_admittance > 0.0) {
            return Err(Error::Config("fault_admittance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub freq_filter_tc: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 0.005, t_end: 5.0, freq_filter_tc: 0.05 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt < self.t_end) {
            return Err(Error::Config(format!("need 0 < dt < t_end (dt = {}, t_end = {})", self.dt, self.t_end)));
        }
        if !(self.freq_filter_tc > 0.0) {
            return Err(Error::Config("freq_filter_tc must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn step_index(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorState {
    pub delta: f64,
    pub omega: f64,
    pub eq_p: f64,
    pub ed_p: f64,
    pub efd: f64,
}

impl GeneratorState {
    fn axpy(&self, h: f64, d: &GeneratorState) -> GeneratorState {
        GeneratorState {
            delta: self.delta + h * d.delta,
            omega: self.omega + h * d.omega,
            eq_p: self.eq_p + h * d.eq_p,
            ed_p: self.ed_p + h * d.ed_p,
            efd: self.efd + h * d.efd,
        }
    }

    fn is_finite(&self) -> bool {
        [self.delta, self.omega, self.eq_p, self.ed_p, self.efd].iter().all(|x| x.is_finite())
    }

    fn max_abs(&self) -> f64 {
        [self.delta, self.omega, self.eq_p, self.ed_p, self.efd].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Washout-filtered derivative of a bus voltage angle.
///
/// With the angle taken as piecewise linear between samples, the update is
/// the exact discretization of `s / (1 + tc s)`; the output is scaled to a
/// per-unit frequency deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyEstimator {
    prev_theta: f64,
    rate: f64,
    decay: f64,
    dt: f64,
    omega_base: f64,
}

impl FrequencyEstimator {
    pub fn new(theta0: f64, dt: f64, tc: f64, nominal_hz: f64) -> Self {
        Self { prev_theta: theta0, rate: 0.0, decay: (-dt / tc).exp(), dt, omega_base: TAU * nominal_hz }
    }

    /// Feeds the next angle sample and returns the per-unit deviation.
    pub fn update(&mut self, theta: f64) -> f64 {
        let mut d = theta - self.prev_theta;
        d -= TAU * ((d + PI) / TAU).floor();
        self.prev_theta = theta;
        self.rate = self.decay * self.rate + (1.0 - self.decay) * d / self.dt;
        self.value()
    }

    pub fn value(&self) -> f64 {
        self.rate / self.omega_base
    }
}

/// Runs the estimator over an angle history (radians, spaced `dt`) and
/// returns the final per-unit frequency deviation.
pub fn estimate_bus_frequency(theta_history: &[f64], dt: f64, freq_filter_tc: f64, nominal_hz: f64) -> f64 {
    let Some((&first, rest)) = theta_history.split_first() else {
        return 0.0;
    };
    let mut est = FrequencyEstimator::new(first, dt, freq_filter_tc, nominal_hz);
    rest.iter().fold(0.0, |_, &th| est.update(th))
}

/// Simulated time series. Matrices are row-per-sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub bus_ids: Vec<u32>,
    pub bess_buses: Vec<u32>,
    pub times: Vec<f64>,
    pub v_mag: Vec<Vec<f64>>,
    pub delta_f: Vec<Vec<f64>>,
    pub bess_p: Vec<Vec<f64>>,
    pub bess_soc: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_buses(&self) -> usize {
        self.bus_ids.len()
    }

    /// Index of the sample closest to `t`.
    pub fn sample_at(&self, t: f64) -> usize {
        let dt = if self.times.len() > 1 { self.times[1] - self.times[0] } else { 1.0 };
        ((t - self.times[0]) / dt).round().clamp(0.0, (self.times.len() - 1) as f64) as usize
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend(self.bus_ids.iter().map(|b| format!("v_{b}")));
        header.extend(self.bus_ids.iter().map(|b| format!("f_{b}")));
        header.extend(self.bess_buses.iter().map(|b| format!("p_bess_{b}")));
        header.extend(self.bess_buses.iter().map(|b| format!("soc_{b}")));
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            for block in [&self.v_mag[k], &self.delta_f[k], &self.bess_p[k], &self.bess_soc[k]] {
                row.extend(block.iter().map(|x| x.to_string()));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads back a CSV written by [`Trajectory::write_csv`].
    pub fn read_csv(text: &str) -> Result<Trajectory> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Schema("empty trajectory csv".into()))?.split(',').collect();
        let ids = |prefix: &str| -> Vec<u32> {
            header.iter().filter_map(|h| h.strip_prefix(prefix)).filter_map(|s| s.parse().ok()).collect()
        };
        let bus_ids = ids("v_");
        let bess_buses = ids("p_bess_");
        let (n, m) = (bus_ids.len(), bess_buses.len());
        let mut traj = Trajectory {
            bus_ids,
            bess_buses,
            times: vec![],
            v_mag: vec![],
            delta_f: vec![],
            bess_p: vec![],
            bess_soc: vec![],
        };
        for (lineno, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::Schema(format!("trajectory row {}: {e}", lineno + 2)))?;
            if vals.len() != 1 + 2 * n + 2 * m {
                return Err(Error::Schema(format!("trajectory row {} has {} fields", lineno + 2, vals.len())));
            }
            traj.times.push(vals[0]);
            traj.v_mag.push(vals[1..1 + n].to_vec());
            traj.delta_f.push(vals[1 + n..1 + 2 * n].to_vec());
            traj.bess_p.push(vals[1 + 2 * n..1 + 2 * n + m].to_vec());
            traj.bess_soc.push(vals[1 + 2 * n + m..].to_vec());
        }
        Ok(traj)
    }
}

/// Mutable state of one simulation run.
#[derive(Clone, Debug)]
pub struct SimState {
    pub step: usize,
    pub gens: Vec<GeneratorState>,
    pub bess: Vec<BessState>,
    /// Network solution at the current step.
    pub voltages: Vec<Complex64>,
    freq: Vec<FrequencyEstimator>,
    pub delta_f: Vec<f64>,
}

impl SimState {
    pub fn time(&self, dt: f64) -> f64 {
        self.step as f64 * dt
    }
}

struct Machine {
    bus: usize,
    c: MachineConstants,
    /// Norton admittance folded into the network matrix.
    y_norton: Complex64,
    p_mech: f64,
    v_ref: f64,
}

/// Everything about a run that does not change with time: machine data,
/// factored network matrices and the BESS sites.
pub struct Simulator<'a> {
    case: &'a NetworkCase,
    config: SimConfig,
    contingency: Contingency,
    machines: Vec<Machine>,
    bess_sites: Vec<usize>,
    bess_buses: Vec<u32>,
    bess_spec: BessSpec,
    omega_s: f64,
    normal: Factor,
    faulted: Option<Factor>,
    apply_step: usize,
    clear_step: usize,
    initial: SimState,
}

impl<'a> Simulator<'a> {
    /// Builds the machine equilibrium from a converged power flow. Each
    /// placed BESS starts at `soc_init` with zero output.
    pub fn new(
        case: &'a NetworkCase,
        pf: &PowerFlowSolution,
        placement: &[u32],
        contingency: &Contingency,
        config: &SimConfig,
    ) -> Result<Self> {
        if !pf.converged {
            return Err(Error::Config("dynamic simulation needs a converged power flow".into()));
        }
        config.validate()?;
        contingency.validate()?;
        let fault_idx = case
            .bus_index(contingency.fault_bus)
            .ok_or_else(|| Error::Config(format!("fault bus {} does not exist", contingency.fault_bus)))?;

        let mut bess_sites = Vec::with_capacity(placement.len());
        for &b in placement {
            let i = case.bus_index(b).ok_or_else(|| Error::Config(format!("placement bus {b} does not exist")))?;
            if bess_sites.contains(&i) {
                return Err(Error::Config(format!("placement lists bus {b} twice")));
            }
            bess_sites.push(i);
        }
        for b in case.buses.iter().filter(|b| b.kind != BusKind::Pq) {
            if case.generator_at(b.id).is_none() {
                return Err(Error::Config(format!("{:?} bus {} has no machine for dynamic simulation", b.kind, b.id)));
            }
        }

        let n = case.n_buses();
        let mut y = build_ybus(case);
        for (i, b) in case.buses.iter().enumerate() {
            let v2 = pf.v_mag[i] * pf.v_mag[i];
            y[(i, i)] += Complex64::new(b.p_load, -b.q_load) / v2;
        }

        let mut machines = Vec::with_capacity(case.generators.len());
        let mut gens = Vec::with_capacity(case.generators.len());
        for (gi, g) in case.generators.iter().enumerate() {
            let bus = case.bus_index(g.bus).expect("validated");
            let c = g.on_system_base(case.system_mva_base);
            let v = pf.voltage(bus);
            let s = Complex64::new(pf.p_gen[gi], pf.q_gen[gi]);
            let i = (s / v).conj();
            let e_q = v + Complex64::new(0.0, c.xq) * i;
            let delta = e_q.arg();
            let (vd, vq) = to_dq(v, delta);
            let (id, iq) = to_dq(i, delta);
            let ed_p = vd - c.xq_p * iq;
            let eq_p = vq + c.xd_p * id;
            let efd = eq_p + (c.xd - c.xd_p) * id;
            if efd < c.efd_min || efd > c.efd_max {
                return Err(Error::Initialization { bus: g.bus, residual: efd });
            }
            let v_ref = v.norm() + efd / c.avr_gain;
            let p_mech = vd * id + vq * iq;
            let y_norton = Complex64::new(0.0, -0.5 * (1.0 / c.xd_p + 1.0 / c.xq_p));
            y[(bus, bus)] += y_norton;
            machines.push(Machine { bus, c, y_norton, p_mech, v_ref });
            gens.push(GeneratorState { delta, omega: 0.0, eq_p, ed_p, efd });
        }

        let normal = y.clone().lu();
        let (apply_step, clear_step) = (config.step_index(contingency.t_apply), config.step_index(contingency.t_clear));
        let faulted = (clear_step > apply_step).then(|| {
            let mut yf = y.clone();
            yf[(fault_idx, fault_idx)] += Complex64::new(contingency.fault_admittance, 0.0);
            yf.lu()
        });

        let omega_s = TAU * case.nominal_hz;
        let bess_spec = case.bess_template.clone();
        let freq = (0..n)
            .map(|i| FrequencyEstimator::new(pf.v_ang[i], config.dt, config.freq_filter_tc, case.nominal_hz))
            .collect();
        let placeholder = SimState {
            step: 0,
            gens,
            bess: vec![BessState::initial(&bess_spec); bess_sites.len()],
            voltages: (0..n).map(|i| pf.voltage(i)).collect(),
            freq,
            delta_f: vec![0.0; n],
        };

        let mut sim = Simulator {
            case,
            config: *config,
            contingency: *contingency,
            machines,
            bess_buses: placement.to_vec(),
            bess_sites,
            bess_spec,
            omega_s,
            normal,
            faulted,
            apply_step,
            clear_step,
            initial: placeholder,
        };

        // Equilibrium check on the undisturbed network.
        let mut check = sim.initial.clone();
        check.voltages = sim.solve_network(&check.gens, &check.bess, &sim.normal, &check.voltages, 0.0)?;
        let derivs = sim.derivatives(&check.gens, &check.voltages);
        for (m, d) in sim.machines.iter().zip(&derivs) {
            let residual = d.max_abs();
            if residual > INIT_RESIDUAL_LIMIT {
                return Err(Error::Initialization { bus: case.buses[m.bus].id, residual });
            }
        }

        // Row 0 uses the topology active over the first step.
        let mut state = sim.initial.clone();
        let factor = sim.factor_at(0);
        state.voltages = sim.solve_network(&state.gens, &state.bess, factor, &check.voltages, 0.0)?;
        sim.update_frequency(&mut state);
        sim.initial = state;
        Ok(sim)
    }

    pub fn initial_state(&self) -> SimState {
        self.initial.clone()
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn contingency(&self) -> &Contingency {
        &self.contingency
    }

    /// Largest state derivative at the given state, for equilibrium checks.
    pub fn max_derivative(&self, state: &SimState) -> f64 {
        self.derivatives(&state.gens, &state.voltages).iter().map(GeneratorState::max_abs).fold(0.0, f64::max)
    }

    fn factor_at(&self, step: usize) -> &Factor {
        match &self.faulted {
            Some(f) if step >= self.apply_step && step < self.clear_step => f,
            _ => &self.normal,
        }
    }

    /// Advances one step of `dt`.
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        let dt = self.config.dt;
        let t_next = (state.step + 1) as f64 * dt;
        let factor = self.factor_at(state.step);

        let bess_next: Vec<BessState> = state
            .bess
            .iter()
            .zip(&self.bess_sites)
            .map(|(b, &site)| bess::step(*b, state.delta_f[site], dt, &self.bess_spec))
            .collect();

        let f0 = self.derivatives(&state.gens, &state.voltages);
        let predicted: Vec<GeneratorState> = state
            .gens
            .iter()
            .zip(&f0)
            .zip(&self.machines)
            .map(|((x, d), m)| clamp_field(x.axpy(dt, d), &m.c))
            .collect();
        let v_pred = self.solve_network(&predicted, &bess_next, factor, &state.voltages, t_next)?;
        let f1 = self.derivatives(&predicted, &v_pred);
        let gens: Vec<GeneratorState> = state
            .gens
            .iter()
            .zip(f0.iter().zip(&f1))
            .zip(&self.machines)
            .map(|((x, (a, b)), m)| {
                let avg = a.axpy(1.0, b);
                clamp_field(x.axpy(0.5 * dt, &avg), &m.c)
            })
            .collect();
        if let Some(bad) = gens.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                time: t_next,
                what: format!("machine on bus {}", self.case.buses[self.machines[bad].bus].id),
            });
        }

        let next_factor = self.factor_at(state.step + 1);
        let voltages = self.solve_network(&gens, &bess_next, next_factor, &v_pred, t_next)?;
        let mut next = SimState {
            step: state.step + 1,
            gens,
            bess: bess_next,
            voltages,
            freq: state.freq.clone(),
            delta_f: state.delta_f.clone(),
        };
        self.update_frequency(&mut next);
        Ok(next)
    }

    /// Runs from the initial state to `t_end`.
    pub fn run(&self) -> Result<Trajectory> {
        let steps = self.config.n_steps();
        let n = self.case.n_buses();
        let mut traj = Trajectory {
            bus_ids: self.case.buses.iter().map(|b| b.id).collect(),
            bess_buses: self.bess_buses.clone(),
            times: Vec::with_capacity(steps + 1),
            v_mag: Vec::with_capacity(steps + 1),
            delta_f: Vec::with_capacity(steps + 1),
            bess_p: Vec::with_capacity(steps + 1),
            bess_soc: Vec::with_capacity(steps + 1),
        };
        let mut state = self.initial_state();
        loop {
            traj.times.push(state.time(self.config.dt));
            traj.v_mag.push(state.voltages.iter().map(|v| v.norm()).collect());
            traj.delta_f.push(state.delta_f.clone());
            traj.bess_p.push(state.bess.iter().map(|b| b.p_es).collect());
            traj.bess_soc.push(state.bess.iter().map(|b| b.soc).collect());
            debug_assert_eq!(state.voltages.len(), n);
            if state.step == steps {
                break;
            }
            state = self.step(&state)?;
        }
        Ok(traj)
    }

    fn update_frequency(&self, state: &mut SimState) {
        for ((est, df), v) in state.freq.iter_mut().zip(state.delta_f.iter_mut()).zip(&state.voltages) {
            *df = est.update(v.arg());
        }
    }

    fn derivatives(&self, gens: &[GeneratorState], v: &[Complex64]) -> Vec<GeneratorState> {
        self.machines
            .iter()
            .zip(gens)
            .map(|(m, g)| {
                let c = &m.c;
                let vt = v[m.bus];
                let (vd, vq) = to_dq(vt, g.delta);
                let id = (g.eq_p - vq) / c.xd_p;
                let iq = (vd - g.ed_p) / c.xq_p;
                let p_elec = vd * id + vq * iq;
                let mut efd_rate = (c.avr_gain * (m.v_ref - vt.norm()) - g.efd) / c.avr_time;
                if (g.efd >= c.efd_max && efd_rate > 0.0) || (g.efd <= c.efd_min && efd_rate < 0.0) {
                    efd_rate = 0.0;
                }
                GeneratorState {
                    delta: self.omega_s * g.omega,
                    omega: (m.p_mech - p_elec - c.d * g.omega) / (2.0 * c.h),
                    eq_p: (g.efd - g.eq_p - (c.xd - c.xd_p) * id) / c.td0_p,
                    ed_p: (-g.ed_p + (c.xq - c.xq_p) * iq) / c.tq0_p,
                    efd: efd_rate,
                }
            })
            .collect()
    }

    /// Solves `Y v = i(v)` where `i` collects machine and BESS injections.
    fn solve_network(
        &self,
        gens: &[GeneratorState],
        bess: &[BessState],
        factor: &Factor,
        guess: &[Complex64],
        time: f64,
    ) -> Result<Vec<Complex64>> {
        let n = guess.len();
        let mut v = guess.to_vec();
        for _ in 0..NETWORK_MAX_ITER {
            let mut rhs = DVector::from_element(n, Complex64::new(0.0, 0.0));
            for (m, g) in self.machines.iter().zip(gens) {
                rhs[m.bus] += machine_current(m, g, v[m.bus]) + m.y_norton * v[m.bus];
            }
            for (b, &site) in bess.iter().zip(&self.bess_sites) {
                rhs[site] += bess_current(b.p_es, v[site]);
            }
            let next = factor
                .solve(&rhs)
                .ok_or_else(|| Error::NetworkSolve { time, reason: "singular network matrix".into() })?;
            let change = next.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if !change.is_finite() {
                return Err(Error::NetworkSolve { time, reason: "non-finite bus voltage".into() });
            }
            v.copy_from_slice(next.as_slice());
            if change < NETWORK_TOL {
                return Ok(v);
            }
        }
        Err(Error::NetworkSolve { time, reason: format!("injection iteration did not settle in {NETWORK_MAX_ITER} passes") })
    }
}

fn clamp_field(mut g: GeneratorState, c: &MachineConstants) -> GeneratorState {
    g.efd = g.efd.clamp(c.efd_min, c.efd_max);
    g
}

/// Projects a network-frame phasor onto a machine's d and q axes.
fn to_dq(x: Complex64, delta: f64) -> (f64, f64) {
    let (s, c) = delta.sin_cos();
    (x.re * s - x.im * c, x.re * c + x.im * s)
}

fn from_dq(d: f64, q: f64, delta: f64) -> Complex64 {
    let (s, c) = delta.sin_cos();
    Complex64::new(d * s + q * c, -d * c + q * s)
}

fn machine_current(m: &Machine, g: &GeneratorState, vt: Complex64) -> Complex64 {
    let (vd, vq) = to_dq(vt, g.delta);
    let id = (g.eq_p - vq) / m.c.xd_p;
    let iq = (vd - g.ed_p) / m.c.xq_p;
    from_dq(id, iq, g.delta)
}

fn bess_current(p: f64, v: Complex64) -> Complex64 {
    let mag = v.norm().max(BESS_CURRENT_LIMIT_VOLTAGE);
    v * (p / (mag * mag))
}

/// Convenience wrapper: solves the power flow and runs one simulation.
pub fn simulate(case: &NetworkCase, placement: &[u32], contingency: &Contingency, config: &SimConfig) -> Result<Trajectory> {
    let pf = solve_power_flow(case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Simulator::new(case, &pf, placement, contingency, config)?.run()
}
