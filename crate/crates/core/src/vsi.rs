//! Post-fault voltage criteria, contingency severity and the placement
//! voltage stability index.
//!
//! The criteria follow the usual transmission grid-code rules: an
//! instantaneous dip or overshoot limit (tighter at load buses), a bound on
//! how long a load bus may sit at a large overshoot, and a post-transient
//! deviation band applied to the tail of the run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsim::{Contingency, SimConfig, Simulator, Trajectory};
use crate::error::{Error, Result};
use crate::netcase::NetworkCase;
use crate::powerflow::PowerFlowSolution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaConfig {
    pub dip_limit_load: f64,
    pub dip_limit_gen: f64,
    /// Cycles at nominal frequency.
    pub overshoot_duration_limit: f64,
    pub overshoot_duration_threshold: f64,
    pub post_transient_deviation: f64,
    /// Length of the trailing window, seconds.
    pub post_transient_window: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        Self {
            dip_limit_load: 0.25,
            dip_limit_gen: 0.30,
            overshoot_duration_limit: 20.0,
            overshoot_duration_threshold: 0.20,
            post_transient_deviation: 0.05,
            post_transient_window: 1.0,
        }
    }
}

impl CriteriaConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("dip_limit_load", self.dip_limit_load),
            ("dip_limit_gen", self.dip_limit_gen),
            ("overshoot_duration_threshold", self.overshoot_duration_threshold),
            ("post_transient_deviation", self.post_transient_deviation),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("criteria.{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.overshoot_duration_limit > 0.0 && self.post_transient_window > 0.0) {
            return Err(Error::Config("criteria durations must be positive".into()));
        }
        Ok(())
    }
}

/// Violation flags aligned sample-for-sample with a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationMask {
    pub bus_ids: Vec<u32>,
    pub violated: Vec<Vec<bool>>,
    pub per_bus: Vec<usize>,
}

impl ViolationMask {
    pub fn total(&self) -> usize {
        self.per_bus.iter().sum()
    }

    pub fn violated_buses(&self) -> Vec<u32> {
        self.bus_ids.iter().zip(&self.per_bus).filter(|(_, &n)| n > 0).map(|(&b, _)| b).collect()
    }

    /// Buses flagged at sample `k`.
    pub fn violated_at(&self, k: usize) -> Vec<u32> {
        self.bus_ids.iter().zip(&self.violated[k]).filter(|(_, &v)| v).map(|(&b, _)| b).collect()
    }
}

/// Relative voltage deviation `|v_t - v0| / v0`.
pub fn voltage_variation(v_t: f64, v0: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("baseline voltage must be positive, got {v0}")));
    }
    Ok((v_t - v0).abs() / v0)
}

fn deviation(v_t: f64, v0: f64) -> f64 {
    (v_t - v0).abs() / v0
}

/// Flags criteria violations. Samples before `t_clear` are not evaluated.
pub fn check_criteria(
    traj: &Trajectory,
    v0: &[f64],
    config: &CriteriaConfig,
    case: &NetworkCase,
    t_clear: f64,
) -> Result<ViolationMask> {
    let n = traj.n_buses();
    if v0.len() != n {
        return Err(Error::Structure(format!("baseline has {} buses, trajectory {}", v0.len(), n)));
    }
    if let Some(&bad) = v0.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("baseline voltage must be positive, got {bad}")));
    }
    let t_len = traj.len();
    let mut violated = vec![vec![false; n]; t_len];
    if t_len == 0 {
        return Ok(ViolationMask { bus_ids: traj.bus_ids.clone(), violated, per_bus: vec![0; n] });
    }
    let dt = if t_len > 1 { traj.times[1] - traj.times[0] } else { 0.0 };
    let eps = 1e-9 * dt.max(1e-12);
    let first = traj.times.iter().position(|&t| t >= t_clear - eps).unwrap_or(t_len);
    let t_end = traj.times[t_len - 1];
    let tail_start = traj.times.iter().position(|&t| t >= t_end - config.post_transient_window - eps).unwrap_or(t_len).max(first);
    let duration_limit = config.overshoot_duration_limit / case.nominal_hz;

    for j in 0..n {
        let is_gen = case
            .bus_index(traj.bus_ids[j])
            .map(|i| case.buses[i].is_generator_bus)
            .ok_or_else(|| Error::Structure(format!("trajectory bus {} not in case", traj.bus_ids[j])))?;
        let limit = if is_gen { config.dip_limit_gen } else { config.dip_limit_load };

        for k in first..t_len {
            if deviation(traj.v_mag[k][j], v0[j]) >= limit {
                violated[k][j] = true;
            }
        }

        if !is_gen {
            let mut k = first;
            while k < t_len {
                let over = |k: usize| (traj.v_mag[k][j] - v0[j]) / v0[j] >= config.overshoot_duration_threshold;
                if over(k) {
                    let start = k;
                    while k < t_len && over(k) {
                        k += 1;
                    }
                    if (k - start) as f64 * dt > duration_limit + eps {
                        for row in &mut violated[start..k] {
                            row[j] = true;
                        }
                    }
                } else {
                    k += 1;
                }
            }
        }

        let tail_bad = (tail_start..t_len).any(|k| deviation(traj.v_mag[k][j], v0[j]) > config.post_transient_deviation);
        if tail_bad {
            for row in &mut violated[tail_start..t_len] {
                row[j] = true;
            }
        }
    }

    let per_bus = (0..n).map(|j| violated.iter().filter(|row| row[j]).count()).collect();
    Ok(ViolationMask { bus_ids: traj.bus_ids.clone(), violated, per_bus })
}

/// Mean over all samples and buses of the deviation at violated samples
/// (zero elsewhere).
pub fn severity_index(traj: &Trajectory, v0: &[f64], mask: &ViolationMask) -> Result<f64> {
    let (t_len, n) = (traj.len(), traj.n_buses());
    if mask.violated.len() != t_len || v0.len() != n || mask.violated.iter().any(|r| r.len() != n) {
        return Err(Error::Structure("severity index inputs are not aligned".into()));
    }
    if t_len == 0 || n == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (row, flags) in traj.v_mag.iter().zip(&mask.violated) {
        for j in 0..n {
            if flags[j] {
                sum += deviation(row[j], v0[j]);
            }
        }
    }
    Ok(sum / (t_len * n) as f64)
}

/// One ranked contingency with its cached no-BESS trajectory.
#[derive(Clone, Debug)]
pub struct ContingencyResult {
    pub contingency: Contingency,
    pub si: f64,
    pub baseline: Trajectory,
    pub mask: ViolationMask,
}

/// Simulates each scenario without storage, scores it and sorts by
/// descending severity (ties by ascending fault bus). Simulations run in
/// parallel; the output order does not depend on scheduling.
pub fn rank_contingencies(
    case: &NetworkCase,
    pf: &PowerFlowSolution,
    scenarios: &[Contingency],
    criteria: &CriteriaConfig,
    sim: &SimConfig,
) -> Result<Vec<ContingencyResult>> {
    criteria.validate()?;
    let mut results = scenarios
        .par_iter()
        .map(|c| {
            let baseline = Simulator::new(case, pf, &[], c, sim)?.run().map_err(|e| tag(c, e))?;
            let mask = check_criteria(&baseline, &pf.v_mag, criteria, case, c.t_clear)?;
            let si = severity_index(&baseline, &pf.v_mag, &mask)?;
            Ok(ContingencyResult { contingency: *c, si, baseline, mask })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| b.si.total_cmp(&a.si).then(a.contingency.fault_bus.cmp(&b.contingency.fault_bus)));
    Ok(results)
}

fn tag(c: &Contingency, e: Error) -> Error {
    match e {
        Error::NetworkSolve { time, reason } => {
            Error::NetworkSolve { time, reason: format!("fault at bus {}: {reason}", c.fault_bus) }
        }
        Error::NonFinite { time, what } => Error::NonFinite { time, what: format!("fault at bus {}: {what}", c.fault_bus) },
        other => other,
    }
}

/// Largest voltage improvement at bus `j` over the run, per unit of total
/// installed droop gain. Signed: a placement that lowers the voltage at
/// every instant scores negative.
pub fn vsi_sensitivity(new: &Trajectory, old: &Trajectory, j: usize, total_gain: f64) -> Result<f64> {
    if !(total_gain > 0.0) {
        return Err(Error::Domain(format!("total droop gain must be positive, got {total_gain}")));
    }
    if new.len() != old.len() || new.n_buses() != old.n_buses() || j >= new.n_buses() {
        return Err(Error::Structure("trajectories are not aligned".into()));
    }
    let peak = new
        .v_mag
        .iter()
        .zip(&old.v_mag)
        .map(|(a, b)| a[j] - b[j])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(peak / total_gain)
}

/// Bus-averaged sensitivity for one contingency.
pub fn vsi_contingency(new: &Trajectory, old: &Trajectory, total_gain: f64) -> Result<f64> {
    let n = new.n_buses();
    if n == 0 {
        return Err(Error::Structure("trajectory has no buses".into()));
    }
    let mut sum = 0.0;
    for j in 0..n {
        sum += vsi_sensitivity(new, old, j, total_gain)?;
    }
    Ok(sum / n as f64)
}

/// Severity-weighted index of one placement over the ranked contingencies.
/// `new[k]` must be the placement's trajectory under `results[k]`.
pub fn vsi_placement(new: &[Trajectory], results: &[ContingencyResult], total_gain: f64) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Structure("need at least one ranked contingency".into()));
    }
    if new.len() != results.len() {
        return Err(Error::Structure(format!("{} trajectories for {} contingencies", new.len(), results.len())));
    }
    let mut total = 0.0;
    for (traj, r) in new.iter().zip(results) {
        total += r.si * vsi_contingency(traj, &r.baseline, total_gain)?;
    }
    Ok(total)
}
