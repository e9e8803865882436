//! End-to-end placement study: power flow, contingency ranking, CE and PSO
//! placement against the cached baselines, and verification runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynsim::{Contingency, SimConfig, Simulator, Trajectory};
use crate::error::{at_stage, Error, Result};
use crate::netcase::{candidate_buses, load_case, new_england_39, NetworkCase};
use crate::optim::{ce_optimize, pso_optimize, CEOutcome, CEParams, CETraceRow, PSOOutcome, PSOParams, PSOTraceRow, Placement};
use crate::powerflow::{solve_power_flow, PowerFlowSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::vsi::{check_criteria, rank_contingencies, severity_index, vsi_placement, ContingencyResult, CriteriaConfig, ViolationMask};

/// Which buses get a fault scenario: `"all"` or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSelection", into = "RawSelection")]
pub enum BusSelection {
    All,
    List(Vec<u32>),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSelection {
    Word(String),
    List(Vec<u32>),
}

impl TryFrom<RawSelection> for BusSelection {
    type Error = String;
    fn try_from(raw: RawSelection) -> std::result::Result<Self, String> {
        match raw {
            RawSelection::Word(w) if w == "all" => Ok(BusSelection::All),
            RawSelection::Word(w) => Err(format!("expected \"all\" or a list of bus ids, got {w:?}")),
            RawSelection::List(v) => Ok(BusSelection::List(v)),
        }
    }
}

impl From<BusSelection> for RawSelection {
    fn from(s: BusSelection) -> Self {
        match s {
            BusSelection::All => RawSelection::Word("all".into()),
            BusSelection::List(v) => RawSelection::List(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContingencySweep {
    pub buses: BusSelection,
    pub t_apply: f64,
    pub duration: f64,
    pub fault_admittance: f64,
}

impl Default for ContingencySweep {
    fn default() -> Self {
        let c = Contingency::bus_fault(0);
        Self { buses: BusSelection::All, t_apply: c.t_apply, duration: c.t_clear - c.t_apply, fault_admittance: c.fault_admittance }
    }
}

impl ContingencySweep {
    pub fn scenarios(&self, case: &NetworkCase) -> Result<Vec<Contingency>> {
        let buses: Vec<u32> = match &self.buses {
            BusSelection::All => case.buses.iter().map(|b| b.id).collect(),
            BusSelection::List(v) => v.clone(),
        };
        if buses.is_empty() {
            return Err(Error::Config("contingency list is empty".into()));
        }
        buses.iter().map(|&b| self.contingency(case, b)).collect()
    }

    pub fn contingency(&self, case: &NetworkCase, bus: u32) -> Result<Contingency> {
        if case.bus_index(bus).is_none() {
            return Err(Error::Config(format!("contingency bus {bus} is not in the case")));
        }
        let c = Contingency { fault_bus: bus, t_apply: self.t_apply, t_clear: self.t_apply + self.duration, fault_admittance: self.fault_admittance };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Case file; relative paths resolve against the config file. `None`
    /// selects the bundled 39-bus case.
    pub case_path: Option<PathBuf>,
    pub contingencies: ContingencySweep,
    pub criteria: CriteriaConfig,
    pub sim: SimConfig,
    pub ce: CEParams,
    pub pso: PSOParams,
    pub run_pso: bool,
    pub top_k: usize,
    pub n_es: usize,
    pub out_dir: PathBuf,
    /// Seeds both optimizers; overrides their own `seed` fields.
    pub seed: u64,
    pub snapshot_time: f64,
    pub overshoot_high: f64,
    pub overshoot_low: f64,
    /// Fault used for the verification runs; defaults to the top-ranked one.
    pub verify_fault_bus: Option<u32>,
    /// Write per-contingency trajectories for every top-K scenario, not just
    /// the verification fault.
    pub write_all_trajectories: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            case_path: None,
            contingencies: ContingencySweep::default(),
            criteria: CriteriaConfig::default(),
            sim: SimConfig::default(),
            ce: CEParams::default(),
            pso: PSOParams::default(),
            run_pso: true,
            top_k: 5,
            n_es: 3,
            out_dir: PathBuf::from("study_out"),
            seed: 0,
            snapshot_time: 1.4,
            overshoot_high: 1.25,
            overshoot_low: 1.2,
            verify_fault_bus: None,
            write_all_trajectories: true,
        }
    }
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    /// Reads a config file and resolves a relative case path against it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.case_path, path.parent()) {
            if p.is_relative() {
                cfg.case_path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        if self.n_es < 1 {
            return Err(Error::Config("n_es must be at least 1".into()));
        }
        if let BusSelection::List(v) = &self.contingencies.buses {
            if v.is_empty() {
                return Err(Error::Config("contingency list is empty".into()));
            }
        }
        if let Some(p) = &self.case_path {
            if !p.exists() {
                return Err(Error::Config(format!("case file {} does not exist", p.display())));
            }
        }
        if !(self.overshoot_high >= self.overshoot_low) {
            return Err(Error::Config("overshoot_high must not be below overshoot_low".into()));
        }
        if !(self.snapshot_time >= 0.0 && self.snapshot_time <= self.sim.t_end) {
            return Err(Error::Config("snapshot_time must lie inside the simulated span".into()));
        }
        self.criteria.validate()?;
        self.sim.validate()?;
        self.ce.validate()?;
        self.pso.validate()?;
        Ok(())
    }

    pub fn load_case(&self) -> Result<NetworkCase> {
        match &self.case_path {
            Some(p) => load_case(p),
            None => Ok(new_england_39()),
        }
    }

    fn ce_params(&self) -> CEParams {
        CEParams { seed: self.seed, ..self.ce.clone() }
    }

    fn pso_params(&self) -> PSOParams {
        PSOParams { seed: self.seed, ..self.pso.clone() }
    }
}

/// Everything the optimizers need, computed once: the pre-fault solution,
/// the full ranking with cached no-BESS baselines, and the candidate list.
pub struct Prepared {
    pub config: StudyConfig,
    pub case: NetworkCase,
    pub pf: PowerFlowSolution,
    pub ranking: Vec<ContingencyResult>,
    pub candidates: Vec<u32>,
}

impl Prepared {
    pub fn new(config: StudyConfig) -> Result<Self> {
        config.validate()?;
        let case = config.load_case().map_err(at_stage("case"))?;
        let scenarios = config.contingencies.scenarios(&case)?;
        let candidates = candidate_buses(&case);
        if candidates.len() < config.n_es {
            return Err(Error::Config(format!("{} candidate buses for {} units", candidates.len(), config.n_es)));
        }
        let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(at_stage("power flow"))?;
        let ranking = rank_contingencies(&case, &pf, &scenarios, &config.criteria, &config.sim).map_err(at_stage("ranking"))?;
        Ok(Self { config, case, pf, ranking, candidates })
    }

    pub fn top(&self) -> &[ContingencyResult] {
        &self.ranking[..self.config.top_k.min(self.ranking.len())]
    }

    pub fn total_gain(&self) -> f64 {
        self.config.n_es as f64 * self.case.bess_template.k_es
    }

    /// Runs `buses` under every top-K contingency.
    pub fn simulate_top(&self, buses: &[u32]) -> Result<Vec<Trajectory>> {
        self.top()
            .iter()
            .map(|r| Simulator::new(&self.case, &self.pf, buses, &r.contingency, &self.config.sim)?.run())
            .collect()
    }

    /// Severity-weighted VSI of a placement.
    pub fn objective(&self, placement: &Placement) -> Result<f64> {
        let trajs = self.simulate_top(&placement.bus_ids(&self.candidates))?;
        vsi_placement(&trajs, self.top(), self.total_gain())
    }

    pub fn run_ce(&self) -> Result<CEOutcome> {
        ce_optimize(|p: &Placement| self.objective(p), &self.config.ce_params(), self.candidates.len(), self.config.n_es)
    }

    pub fn run_pso(&self) -> Result<PSOOutcome> {
        pso_optimize(|p: &Placement| self.objective(p), &self.config.pso_params(), self.candidates.len(), self.config.n_es)
    }

    pub fn verify_contingency(&self) -> Result<Contingency> {
        match self.config.verify_fault_bus {
            Some(b) => self.config.contingencies.contingency(&self.case, b),
            None => Ok(self.ranking[0].contingency),
        }
    }

    /// One verification run of `buses` under the verification fault.
    pub fn verify(&self, label: &str, buses: &[u32]) -> Result<VerificationRun> {
        let c = self.verify_contingency()?;
        let cached = self.ranking.iter().find(|r| r.contingency == c);
        let trajectory = match (buses.is_empty(), cached) {
            (true, Some(r)) => r.baseline.clone(),
            _ => Simulator::new(&self.case, &self.pf, buses, &c, &self.config.sim)?.run()?,
        };
        let mask = check_criteria(&trajectory, &self.pf.v_mag, &self.config.criteria, &self.case, c.t_clear)?;
        let si = severity_index(&trajectory, &self.pf.v_mag, &mask)?;
        Ok(VerificationRun { label: label.to_string(), placement: buses.to_vec(), trajectory, mask, si })
    }
}

pub struct VerificationRun {
    pub label: String,
    pub placement: Vec<u32>,
    pub trajectory: Trajectory,
    pub mask: ViolationMask,
    pub si: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioColumn {
    pub label: String,
    pub placement: Vec<u32>,
    /// Buses with V above the high threshold at the snapshot.
    pub above_high: Vec<u32>,
    /// Buses with low < V <= high at the snapshot.
    pub between: Vec<u32>,
    /// Buses flagged by the criteria at the snapshot sample.
    pub criteria_violations_at_snapshot: Vec<u32>,
    /// Buses flagged anywhere in the run.
    pub violated_buses: Vec<u32>,
    pub violated_samples: usize,
    pub si: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub snapshot_time: f64,
    pub overshoot_high: f64,
    pub overshoot_low: f64,
    pub columns: Vec<ScenarioColumn>,
    pub ce_curve: Vec<f64>,
    pub pso_curve: Vec<f64>,
}

impl Comparison {
    pub fn column(&self, label: &str) -> Option<&ScenarioColumn> {
        self.columns.iter().find(|c| c.label == label)
    }
}

/// Overshoot statistics per verification run at the snapshot instant, plus
/// the optimizers' best-value curves.
pub fn compare_report(
    runs: &[VerificationRun],
    snapshot_time: f64,
    high: f64,
    low: f64,
    ce: Option<&[CETraceRow]>,
    pso: Option<&[PSOTraceRow]>,
) -> Comparison {
    let columns = runs
        .iter()
        .map(|r| {
            let k = r.trajectory.sample_at(snapshot_time);
            let v = &r.trajectory.v_mag[k];
            let ids = &r.trajectory.bus_ids;
            let pick = |f: &dyn Fn(f64) -> bool| ids.iter().zip(v).filter(|(_, &x)| f(x)).map(|(&b, _)| b).collect::<Vec<u32>>();
            ScenarioColumn {
                label: r.label.clone(),
                placement: r.placement.clone(),
                above_high: pick(&|x| x > high),
                between: pick(&|x| x > low && x <= high),
                criteria_violations_at_snapshot: r.mask.violated_at(k),
                violated_buses: r.mask.violated_buses(),
                violated_samples: r.mask.total(),
                si: r.si,
            }
        })
        .collect();
    Comparison {
        snapshot_time,
        overshoot_high: high,
        overshoot_low: low,
        columns,
        ce_curve: ce.map(|t| t.iter().map(|r| r.best_value).collect()).unwrap_or_default(),
        pso_curve: pso.map(|t| t.iter().map(|r| r.best_value).collect()).unwrap_or_default(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerSummary {
    pub method: String,
    pub siting_buses: Vec<u32>,
    pub vsi: f64,
    pub iterations_to_convergence: usize,
    pub iterations_run: usize,
    pub evaluations: usize,
    pub failures: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankRow {
    pub fault_bus: u32,
    pub si: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub seed: u64,
    pub n_es: usize,
    pub candidates: usize,
    pub top_contingencies: Vec<RankRow>,
    pub verify_fault_bus: u32,
    pub ce: OptimizerSummary,
    pub pso: Option<OptimizerSummary>,
    pub comparison: Comparison,
    pub wall_time_s: f64,
}

pub fn ranking_csv(ranking: &[ContingencyResult]) -> String {
    let mut s = String::from("fault_bus,si\n");
    for r in ranking {
        let _ = writeln!(s, "{},{}", r.contingency.fault_bus, r.si);
    }
    s
}

pub fn ce_trace_csv(trace: &[CETraceRow], candidates: &[u32]) -> String {
    let mut s = String::from("iter,best_value,gamma");
    for b in candidates {
        let _ = write!(s, ",p_{b}");
    }
    s.push('\n');
    for r in trace {
        let _ = write!(s, "{},{},{}", r.iter, r.best_value, r.gamma);
        for p in &r.p {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

pub fn pso_trace_csv(trace: &[PSOTraceRow]) -> String {
    let mut s = String::from("iter,best_value\n");
    for r in trace {
        let _ = writeln!(s, "{},{}", r.iter, r.best_value);
    }
    s
}

pub fn snapshot_csv(v0: &[f64], runs: &[VerificationRun], t: f64) -> String {
    let mut s = String::from("bus,v0");
    for r in runs {
        let _ = write!(s, ",v_{}", r.label);
    }
    s.push('\n');
    let Some(first) = runs.first() else { return s };
    for (j, b) in first.trajectory.bus_ids.iter().enumerate() {
        let _ = write!(s, "{b},{}", v0[j]);
        for r in runs {
            let _ = write!(s, ",{}", r.trajectory.v_mag[r.trajectory.sample_at(t)][j]);
        }
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let io = |source| Error::Io { path: path.display().to_string(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    traj.write_csv(&mut w).map_err(io)?;
    std::io::Write::flush(&mut w).map_err(io)
}

fn summary(method: &str, buses: Vec<u32>, vsi: f64, conv: usize, run: usize, evals: usize, fails: usize, t: f64) -> OptimizerSummary {
    OptimizerSummary {
        method: method.into(),
        siting_buses: buses,
        vsi,
        iterations_to_convergence: conv,
        iterations_run: run,
        evaluations: evals,
        failures: fails,
        wall_time_s: t,
    }
}

/// Runs the whole study and writes every artifact to `config.out_dir`.
/// Artifacts from completed stages stay on disk if a later stage fails.
pub fn run_placement_study(config: StudyConfig) -> Result<StudyReport> {
    let started = Instant::now();
    let out = config.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(|source| Error::Io { path: out.display().to_string(), source })?;
    let prep = Prepared::new(config)?;
    let cfg = &prep.config;
    write_text(&out.join("ranking.csv"), &ranking_csv(&prep.ranking))?;

    let t = Instant::now();
    let ce = prep.run_ce().map_err(at_stage("ce"))?;
    let ce_time = t.elapsed().as_secs_f64();
    write_text(&out.join("ce_trace.csv"), &ce_trace_csv(&ce.trace, &prep.candidates))?;
    let ce_pl = ce.state.best_placement.clone().ok_or_else(|| Error::Infeasible("optimizer evaluated nothing".into()))?;
    let ce_buses = ce_pl.bus_ids(&prep.candidates);

    let pso = if cfg.run_pso {
        let t = Instant::now();
        let p = prep.run_pso().map_err(at_stage("pso"))?;
        let secs = t.elapsed().as_secs_f64();
        write_text(&out.join("pso_trace.csv"), &pso_trace_csv(&p.trace))?;
        Some((p, secs))
    } else {
        None
    };

    let verify = || -> Result<_> {
        let mut runs = vec![prep.verify("nobess", &[])?];
        if let Some((p, _)) = &pso {
            runs.push(prep.verify("pso", &p.best_placement.bus_ids(&prep.candidates))?);
        }
        runs.push(prep.verify("ce", &ce_buses)?);
        Ok(runs)
    };
    let runs = verify().map_err(at_stage("verification"))?;
    let vc = prep.verify_contingency()?;

    // Per-scenario trajectories, enough to recompute the reported VSI offline.
    let mut written = Vec::new();
    if cfg.write_all_trajectories {
        let mut placements = vec![("ce", ce_buses.clone())];
        if let Some((p, _)) = &pso {
            placements.push(("pso", p.best_placement.bus_ids(&prep.candidates)));
        }
        for r in prep.top() {
            written.push(r.contingency.fault_bus);
            write_trajectory(&out.join(format!("trajectory_bus{}_nobess.csv", r.contingency.fault_bus)), &r.baseline)?;
        }
        for (label, buses) in &placements {
            let trajs = prep.simulate_top(buses).map_err(at_stage("verification"))?;
            for (r, tr) in prep.top().iter().zip(&trajs) {
                write_trajectory(&out.join(format!("trajectory_bus{}_{label}.csv", r.contingency.fault_bus)), tr)?;
            }
        }
    }
    if !written.contains(&vc.fault_bus) {
        for r in &runs {
            write_trajectory(&out.join(format!("trajectory_bus{}_{}.csv", vc.fault_bus, r.label)), &r.trajectory)?;
        }
    }
    write_text(&out.join("snapshot.csv"), &snapshot_csv(&prep.pf.v_mag, &runs, cfg.snapshot_time))?;

    let comparison = compare_report(
        &runs,
        cfg.snapshot_time,
        cfg.overshoot_high,
        cfg.overshoot_low,
        Some(&ce.trace),
        pso.as_ref().map(|(p, _)| p.trace.as_slice()),
    );
    let report = StudyReport {
        seed: cfg.seed,
        n_es: cfg.n_es,
        candidates: prep.candidates.len(),
        top_contingencies: prep.top().iter().map(|r| RankRow { fault_bus: r.contingency.fault_bus, si: r.si }).collect(),
        verify_fault_bus: vc.fault_bus,
        ce: summary("ce", ce_buses, ce.state.best_value, ce.converged_iter, ce.state.iter, ce.evaluations, ce.failures, ce_time),
        pso: pso.as_ref().map(|(p, secs)| {
            summary(
                "pso",
                p.best_placement.bus_ids(&prep.candidates),
                p.best_value,
                p.converged_iter,
                p.trace.len(),
                p.evaluations,
                p.failures,
                *secs,
            )
        }),
        comparison,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    write_text(&out.join("report.json"), &json)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_selection() {
        let cfg = StudyConfig::parse(r#"{"contingencies": {"buses": [16, 15]}, "top_k": 2}"#).unwrap();
        assert_eq!(cfg.contingencies.buses, BusSelection::List(vec![16, 15]));
        assert_eq!(cfg.n_es, 3);
        assert_eq!(cfg.ce, CEParams::default());
        let all = StudyConfig::parse(r#"{"contingencies": {"buses": "all"}}"#).unwrap();
        assert_eq!(all.contingencies.buses, BusSelection::All);
        assert!(StudyConfig::parse(r#"{"contingencies": {"buses": "some"}}"#).is_err());
        assert!(StudyConfig::parse(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn empty_contingency_list_is_rejected_up_front() {
        let cfg = StudyConfig::parse(r#"{"contingencies": {"buses": []}}"#).unwrap();
        let err = Prepared::new(cfg).err().unwrap();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn sweep_builds_fault_scenarios() {
        let case = new_england_39();
        let s = ContingencySweep { duration: 0.15, ..Default::default() };
        let all = s.scenarios(&case).unwrap();
        assert_eq!(all.len(), 39);
        assert!((all[0].t_clear - 0.15).abs() < 1e-15);
        assert!(s.contingency(&case, 99).is_err());
    }
}
