//! Grid data model, case-file parsing and the bundled New England 39-bus case.
//!
//! Case files are JSON. Loads and generator dispatch are written in MW/MVAr
//! and converted to per-unit on the system base at parse time; everything
//! else (impedances, shunts, machine constants) is already per-unit. Machine
//! constants are given on the machine's own `mva_base` and rescaled by
//! [`Generator::on_system_base`].

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled New England 10-machine 39-bus case.
pub const NEW_ENGLAND_39: &str = include_str!("../cases/new_england_39.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    pub base_kv: f64,
    pub v_setpoint: Option<f64>,
    /// Per-unit on the system base.
    pub p_load: f64,
    pub q_load: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
    pub is_generator_bus: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: u32,
    pub to_bus: u32,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_shunt: f64,
    #[serde(default = "unity")]
    pub tap_ratio: f64,
    #[serde(default = "yes")]
    pub in_service: bool,
}

/// Synchronous machine with a first-order AVR. Reactances, inertia and
/// damping are on `mva_base`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub bus: u32,
    pub mva_base: f64,
    /// Scheduled active output, per-unit on the system base. Ignored for the
    /// slack machine.
    pub p_gen: f64,
    pub h: f64,
    pub d: f64,
    pub xd: f64,
    pub xq: f64,
    pub xd_p: f64,
    pub xq_p: f64,
    pub td0_p: f64,
    pub tq0_p: f64,
    pub avr_gain: f64,
    pub avr_time: f64,
    pub efd_min: f64,
    pub efd_max: f64,
}

/// Machine constants rescaled to the system base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineConstants {
    pub h: f64,
    pub d: f64,
    pub xd: f64,
    pub xq: f64,
    pub xd_p: f64,
    pub xq_p: f64,
    pub td0_p: f64,
    pub tq0_p: f64,
    pub avr_gain: f64,
    pub avr_time: f64,
    pub efd_min: f64,
    pub efd_max: f64,
}

impl Generator {
    pub fn on_system_base(&self, system_mva_base: f64) -> MachineConstants {
        let ratio = self.mva_base / system_mva_base;
        MachineConstants {
            h: self.h * ratio,
            d: self.d * ratio,
            xd: self.xd / ratio,
            xq: self.xq / ratio,
            xd_p: self.xd_p / ratio,
            xq_p: self.xq_p / ratio,
            td0_p: self.td0_p,
            tq0_p: self.tq0_p,
            avr_gain: self.avr_gain,
            avr_time: self.avr_time,
            efd_min: self.efd_min,
            efd_max: self.efd_max,
        }
    }
}

/// Battery unit parameters shared by every placed BESS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BessSpec {
    pub k_es: f64,
    pub t_es: f64,
    /// MWh.
    pub e_total: f64,
    pub soc_init: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub p_max: f64,
    #[serde(skip, default = "default_mva_base")]
    pub system_mva_base: f64,
}

impl Default for BessSpec {
    fn default() -> Self {
        Self {
            k_es: 10.0,
            t_es: 0.02,
            e_total: 10.0,
            soc_init: 0.5,
            soc_min: 0.2,
            soc_max: 0.8,
            p_max: 1.0,
            system_mva_base: default_mva_base(),
        }
    }
}

impl BessSpec {
    /// Energy capacity in per-unit seconds on the system base.
    pub fn e_pu_s(&self) -> f64 {
        self.e_total * 3600.0 / self.system_mva_base
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.soc_min
            && self.soc_min < self.soc_init
            && self.soc_init < self.soc_max
            && self.soc_max <= 1.0;
        if !ok {
            return Err(Error::Validation(format!(
                "bess_template requires 0 <= soc_min < soc_init < soc_max <= 1 (got {}, {}, {})",
                self.soc_min, self.soc_init, self.soc_max
            )));
        }
        for (name, v) in [("k_es", self.k_es), ("t_es", self.t_es), ("p_max", self.p_max), ("e_total", self.e_total)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("bess_template.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A validated grid description. Buses are held in ascending id order and
/// generators in ascending bus order. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkCase {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub bess_template: BessSpec,
    pub system_mva_base: f64,
    pub nominal_hz: f64,
    pub placement_exclusions: Vec<u32>,
    index: HashMap<u32, usize>,
}

// ---- file schema -----------------------------------------------------------

fn unity() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_mva_base() -> f64 {
    100.0
}
fn default_hz() -> f64 {
    60.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRecord {
    #[serde(default = "default_mva_base")]
    mva_base: f64,
    #[serde(default = "default_hz")]
    nominal_hz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRecord {
    id: u32,
    kind: BusKind,
    base_kv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_setpoint: Option<f64>,
    #[serde(default)]
    p_load: f64,
    #[serde(default)]
    q_load: f64,
    #[serde(default)]
    shunt_g: f64,
    #[serde(default)]
    shunt_b: f64,
    #[serde(default)]
    is_generator_bus: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRecord {
    bus: u32,
    mva_base: f64,
    #[serde(default)]
    p_gen: f64,
    h: f64,
    #[serde(default)]
    d: f64,
    xd: f64,
    xq: f64,
    xd_p: f64,
    xq_p: f64,
    td0_p: f64,
    tq0_p: f64,
    avr_gain: f64,
    avr_time: f64,
    efd_min: f64,
    efd_max: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default = "default_system")]
    system: SystemRecord,
    buses: Vec<BusRecord>,
    branches: Vec<Branch>,
    #[serde(default)]
    generators: Vec<GeneratorRecord>,
    #[serde(default)]
    bess_template: BessSpec,
    #[serde(default)]
    placement_exclusions: Vec<u32>,
}

fn default_system() -> SystemRecord {
    SystemRecord { mva_base: default_mva_base(), nominal_hz: default_hz() }
}

/// Parses and validates a case file.
pub fn parse_case(text: &str) -> Result<NetworkCase> {
    let file: CaseFile = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    from_file(file)
}

/// Loads and parses a case file from disk.
pub fn load_case(path: impl AsRef<std::path::Path>) -> Result<NetworkCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_case(&text)
}

/// The bundled 39-bus case.
pub fn new_england_39() -> NetworkCase {
    parse_case(NEW_ENGLAND_39).expect("bundled case is valid")
}

fn from_file(file: CaseFile) -> Result<NetworkCase> {
    let base = file.system.mva_base;
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::Validation(format!("system.mva_base must be positive, got {base}")));
    }
    if !(file.system.nominal_hz > 0.0) {
        return Err(Error::Validation("system.nominal_hz must be positive".into()));
    }

    let mut seen = BTreeSet::new();
    for b in &file.buses {
        if !seen.insert(b.id) {
            return Err(Error::Schema(format!("duplicate bus id {}", b.id)));
        }
    }

    let mut buses: Vec<Bus> = file
        .buses
        .into_iter()
        .map(|b| Bus {
            id: b.id,
            kind: b.kind,
            base_kv: b.base_kv,
            v_setpoint: b.v_setpoint,
            p_load: b.p_load / base,
            q_load: b.q_load / base,
            shunt_g: b.shunt_g,
            shunt_b: b.shunt_b,
            is_generator_bus: b.is_generator_bus,
        })
        .collect();
    buses.sort_by_key(|b| b.id);

    let mut generators: Vec<Generator> = file
        .generators
        .into_iter()
        .map(|g| Generator {
            bus: g.bus,
            mva_base: g.mva_base,
            p_gen: g.p_gen / base,
            h: g.h,
            d: g.d,
            xd: g.xd,
            xq: g.xq,
            xd_p: g.xd_p,
            xq_p: g.xq_p,
            td0_p: g.td0_p,
            tq0_p: g.tq0_p,
            avr_gain: g.avr_gain,
            avr_time: g.avr_time,
            efd_min: g.efd_min,
            efd_max: g.efd_max,
        })
        .collect();
    generators.sort_by_key(|g| g.bus);

    let mut bess_template = file.bess_template;
    bess_template.system_mva_base = base;

    let index = buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let case = NetworkCase {
        buses,
        branches: file.branches,
        generators,
        bess_template,
        system_mva_base: base,
        nominal_hz: file.system.nominal_hz,
        placement_exclusions: file.placement_exclusions,
        index,
    };
    case.validate()?;
    Ok(case)
}

impl NetworkCase {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// Position of a bus id in [`NetworkCase::buses`].
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn slack_index(&self) -> usize {
        self.buses.iter().position(|b| b.kind == BusKind::Slack).expect("validated case has a slack bus")
    }

    pub fn generator_at(&self, bus: u32) -> Option<&Generator> {
        self.generators.iter().find(|g| g.bus == bus)
    }

    /// Total load in per-unit.
    pub fn total_load(&self) -> (f64, f64) {
        self.buses.iter().fold((0.0, 0.0), |(p, q), b| (p + b.p_load, q + b.q_load))
    }

    fn validate(&self) -> Result<()> {
        let v = |msg: String| Err(Error::Validation(msg));

        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return v(format!("exactly one slack bus required, found {slacks}"));
        }
        for b in &self.buses {
            if b.id == 0 {
                return v("bus ids must be positive".into());
            }
            if !(b.base_kv > 0.0) {
                return v(format!("bus {}: base_kv must be positive", b.id));
            }
            if ![b.p_load, b.q_load, b.shunt_g, b.shunt_b].iter().all(|x| x.is_finite()) {
                return v(format!("bus {}: load and shunt values must be finite", b.id));
            }
            if b.kind != BusKind::Pq {
                match b.v_setpoint {
                    Some(vs) if vs > 0.0 && vs.is_finite() => {}
                    _ => return v(format!("bus {}: {:?} bus needs a positive v_setpoint", b.id, b.kind)),
                }
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            if br.from_bus == br.to_bus {
                return v(format!("branch {k}: from_bus equals to_bus ({})", br.from_bus));
            }
            for end in [br.from_bus, br.to_bus] {
                if self.bus_index(end).is_none() {
                    return v(format!("branch {k}: endpoint bus {end} does not exist"));
                }
            }
            if br.x == 0.0 || !br.x.is_finite() {
                return v(format!("branch {k} ({}-{}): x must be non-zero", br.from_bus, br.to_bus));
            }
            if !(br.tap_ratio > 0.0) {
                return v(format!("branch {k}: tap_ratio must be positive"));
            }
        }
        let mut gen_buses = BTreeSet::new();
        for g in &self.generators {
            if self.bus_index(g.bus).is_none() {
                return v(format!("generator on missing bus {}", g.bus));
            }
            if !gen_buses.insert(g.bus) {
                return v(format!("more than one generator on bus {}", g.bus));
            }
            let checks = [
                (g.mva_base > 0.0, "mva_base > 0"),
                (g.h > 0.0, "h > 0"),
                (g.d >= 0.0, "d >= 0"),
                (g.td0_p > 0.0, "td0_p > 0"),
                (g.tq0_p > 0.0, "tq0_p > 0"),
                (g.xd_p > 0.0 && g.xd >= g.xd_p, "xd >= xd_p > 0"),
                (g.xq_p > 0.0 && g.xq >= g.xq_p, "xq >= xq_p > 0"),
                (g.avr_gain > 0.0, "avr_gain > 0"),
                (g.avr_time > 0.0, "avr_time > 0"),
                (g.efd_min < g.efd_max, "efd_min < efd_max"),
            ];
            if let Some((_, rule)) = checks.iter().find(|(ok, _)| !ok) {
                return v(format!("generator on bus {}: violates {rule}", g.bus));
            }
        }
        self.bess_template.validate()?;
        for &ex in &self.placement_exclusions {
            if self.bus_index(ex).is_none() {
                return v(format!("placement exclusion names missing bus {ex}"));
            }
        }
        if !self.is_connected() {
            return v("network is not connected over in-service branches".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.buses.len();
        if n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); n];
        for br in self.branches.iter().filter(|b| b.in_service) {
            let (f, t) = (self.index[&br.from_bus], self.index[&br.to_bus]);
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Serializes back to the case-file schema (MW units for loads and
    /// dispatch).
    pub fn to_json(&self) -> String {
        let base = self.system_mva_base;
        let file = CaseFile {
            system: SystemRecord { mva_base: base, nominal_hz: self.nominal_hz },
            buses: self
                .buses
                .iter()
                .map(|b| BusRecord {
                    id: b.id,
                    kind: b.kind,
                    base_kv: b.base_kv,
                    v_setpoint: b.v_setpoint,
                    p_load: b.p_load * base,
                    q_load: b.q_load * base,
                    shunt_g: b.shunt_g,
                    shunt_b: b.shunt_b,
                    is_generator_bus: b.is_generator_bus,
                })
                .collect(),
            branches: self.branches.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorRecord {
                    bus: g.bus,
                    mva_base: g.mva_base,
                    p_gen: g.p_gen * base,
                    h: g.h,
                    d: g.d,
                    xd: g.xd,
                    xq: g.xq,
                    xd_p: g.xd_p,
                    xq_p: g.xq_p,
                    td0_p: g.td0_p,
                    tq0_p: g.tq0_p,
                    avr_gain: g.avr_gain,
                    avr_time: g.avr_time,
                    efd_min: g.efd_min,
                    efd_max: g.efd_max,
                })
                .collect(),
            bess_template: self.bess_template.clone(),
            placement_exclusions: self.placement_exclusions.clone(),
        };
        serde_json::to_string_pretty(&file).expect("case serializes")
    }
}

/// Buses eligible for BESS placement, ascending by id. The case's
/// `placement_exclusions` are removed.
pub fn candidate_buses(case: &NetworkCase) -> Vec<u32> {
    candidate_buses_excluding(case, &case.placement_exclusions)
}

pub fn candidate_buses_excluding(case: &NetworkCase, exclusions: &[u32]) -> Vec<u32> {
    let excluded: BTreeSet<u32> = exclusions.iter().copied().collect();
    case.buses.iter().map(|b| b.id).filter(|id| !excluded.contains(id)).collect()
}
