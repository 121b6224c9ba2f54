//! Distribution network data model and instance validation.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the three circuits a line or bus can carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C'][self.index()]
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A subset of {A, B, C}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhaseSet(u8);

impl PhaseSet {
    pub const EMPTY: PhaseSet = PhaseSet(0);
    pub const ABC: PhaseSet = PhaseSet(0b111);
    pub const A: PhaseSet = PhaseSet(0b001);

    pub fn from_phases(phases: &[Phase]) -> Self {
        PhaseSet(phases.iter().fold(0, |m, p| m | 1 << p.index()))
    }

    pub fn contains(self, p: Phase) -> bool {
        self.0 >> p.index() & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: PhaseSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: PhaseSet) -> PhaseSet {
        PhaseSet(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Phase> {
        Phase::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

impl fmt::Display for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for PhaseSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PhaseSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let mut set = PhaseSet::EMPTY;
        for c in text.chars() {
            let p = match c {
                'A' => Phase::A,
                'B' => Phase::B,
                'C' => Phase::C,
                other => return Err(serde::de::Error::custom(format!("unknown phase '{other}'"))),
            };
            if set.contains(p) {
                return Err(serde::de::Error::custom(format!("phase {p} listed twice")));
            }
            set.0 |= 1 << p.index();
        }
        Ok(set)
    }
}

/// Per-phase values indexed by [`Phase::index`].
pub type PerPhase = [f64; 3];

/// An all-or-nothing block of load at one bus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadBlock {
    pub demand: PerPhase,
}

impl LoadBlock {
    pub fn total(&self) -> f64 {
        self.demand.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSite {
    #[serde(default)]
    pub existing_capacity: PerPhase,
    /// Largest new capacity a facility may install per phase.
    #[serde(default)]
    pub max_new_capacity: PerPhase,
    #[serde(default)]
    pub facility_cost: f64,
    #[serde(default)]
    pub capacity_cost: PerPhase,
}

impl GenerationSite {
    pub fn can_expand(&self) -> bool {
        self.max_new_capacity.iter().any(|&m| m > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub phases: PhaseSet,
    #[serde(default)]
    pub load_blocks: Vec<LoadBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationSite>,
    #[serde(default)]
    pub is_critical: bool,
}

impl Bus {
    pub fn new(id: impl Into<String>, phases: PhaseSet) -> Self {
        Self {
            id: id.into(),
            phases,
            load_blocks: Vec::new(),
            generation: None,
            is_critical: false,
        }
    }

    pub fn demand(&self, p: Phase) -> f64 {
        self.load_blocks.iter().map(|b| b.demand[p.index()]).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.load_blocks.iter().map(LoadBlock::total).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub phases: PhaseSet,
    pub capacity: PerPhase,
    #[serde(default)]
    pub length_miles: f64,
    #[serde(default)]
    pub is_transformer: bool,
    /// Overrides the default imbalance limit (0.15 for transformers, 1.0 otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_imbalance_limit: Option<f64>,
    #[serde(default)]
    pub exists: bool,
    #[serde(default)]
    pub has_existing_switch: bool,
    #[serde(default)]
    pub hardenable: bool,
    #[serde(default)]
    pub build_cost: f64,
    #[serde(default)]
    pub switch_cost: f64,
    #[serde(default)]
    pub harden_cost: f64,
}

impl Edge {
    /// A line with the given endpoints, phases and per-phase capacity.
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>, phases: PhaseSet, capacity: f64) -> Self {
        let mut cap = [0.0; 3];
        for p in phases.iter() {
            cap[p.index()] = capacity;
        }
        Self {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            phases,
            capacity: cap,
            length_miles: 1.0,
            is_transformer: false,
            phase_imbalance_limit: None,
            exists: false,
            has_existing_switch: false,
            hardenable: false,
            build_cost: 0.0,
            switch_cost: 0.0,
            harden_cost: 0.0,
        }
    }

    pub fn beta(&self) -> f64 {
        self.phase_imbalance_limit
            .unwrap_or(if self.is_transformer { 0.15 } else { 1.0 })
    }
}

fn default_critical() -> f64 {
    0.98
}

fn default_total() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    #[serde(default)]
    pub name: String,
    pub buses: Vec<Bus>,
    pub edges: Vec<Edge>,
    /// Required served fraction of critical load.
    #[serde(default = "default_critical")]
    pub critical_fraction: f64,
    /// Required served fraction of non-critical load.
    #[serde(default = "default_total")]
    pub total_fraction: f64,
}

impl Default for NetworkInstance {
    fn default() -> Self {
        Self {
            name: String::new(),
            buses: Vec::new(),
            edges: Vec::new(),
            critical_fraction: default_critical(),
            total_fraction: default_total(),
        }
    }
}

/// One broken invariant: the offending element and what is wrong with it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

pub type ValidationReport = Vec<Violation>;

impl NetworkInstance {
    pub fn bus_index(&self) -> HashMap<&str, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
    }

    pub fn edge_index(&self) -> HashMap<&str, usize> {
        self.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect()
    }

    /// Endpoint indices of every edge. Panics on a dangling endpoint, so
    /// only call this on validated instances.
    pub fn endpoints(&self) -> Vec<(usize, usize)> {
        let idx = self.bus_index();
        self.edges.iter().map(|e| (idx[e.from.as_str()], idx[e.to.as_str()])).collect()
    }

    pub fn critical_demand(&self) -> f64 {
        self.buses.iter().filter(|b| b.is_critical).map(Bus::total_demand).sum()
    }

    pub fn noncritical_demand(&self) -> f64 {
        self.buses.iter().filter(|b| !b.is_critical).map(Bus::total_demand).sum()
    }
}

/// Lists every broken invariant of `instance`; an empty list means valid.
pub fn validate_instance(instance: &NetworkInstance) -> ValidationReport {
    let mut out = Vec::new();
    let mut bad = |subject: &str, message: String| {
        out.push(Violation {
            subject: subject.to_string(),
            message,
        })
    };
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if !unit(instance.critical_fraction) {
        bad("parameters", "critical_fraction must lie in [0, 1]".into());
    }
    if !unit(instance.total_fraction) {
        bad("parameters", "total_fraction must lie in [0, 1]".into());
    }

    let mut seen = HashSet::new();
    for bus in &instance.buses {
        if !seen.insert(bus.id.as_str()) {
            bad(&bus.id, "duplicate bus id".into());
        }
        if bus.phases.is_empty() {
            bad(&bus.id, "bus has no phases".into());
        }
        for (j, block) in bus.load_blocks.iter().enumerate() {
            if block.demand.iter().any(|d| !d.is_finite() || *d < 0.0) {
                bad(&bus.id, format!("load block {j} has a negative or non-finite demand"));
            }
            if !block.demand.iter().any(|&d| d > 0.0) {
                bad(&bus.id, format!("load block {j} has no positive demand"));
            }
            for p in Phase::ALL {
                if !bus.phases.contains(p) && block.demand[p.index()] != 0.0 {
                    bad(&bus.id, format!("load block {j} has demand on phase {p} outside the bus phases"));
                }
            }
        }
        if let Some(g) = &bus.generation {
            let per_phase = [&g.existing_capacity, &g.max_new_capacity, &g.capacity_cost];
            if per_phase.iter().any(|v| v.iter().any(|x| !x.is_finite() || *x < 0.0))
                || !g.facility_cost.is_finite()
                || g.facility_cost < 0.0
            {
                bad(&bus.id, "generation values must be finite and nonnegative".into());
            }
            for p in Phase::ALL {
                if !bus.phases.contains(p) && (g.max_new_capacity[p.index()] != 0.0 || g.existing_capacity[p.index()] != 0.0) {
                    bad(&bus.id, format!("generation capacity on phase {p} outside the bus phases"));
                }
            }
        }
    }

    let buses: HashMap<&str, &Bus> = instance.buses.iter().map(|b| (b.id.as_str(), b)).collect();
    let mut seen = HashSet::new();
    for e in &instance.edges {
        if !seen.insert(e.id.as_str()) {
            bad(&e.id, "duplicate edge id".into());
        }
        let from = buses.get(e.from.as_str());
        let to = buses.get(e.to.as_str());
        if from.is_none() {
            bad(&e.id, format!("endpoint {} is not a bus", e.from));
        }
        if to.is_none() {
            bad(&e.id, format!("endpoint {} is not a bus", e.to));
        }
        if e.from == e.to {
            bad(&e.id, "edge is a self-loop".into());
        }
        if e.phases.is_empty() {
            bad(&e.id, "edge has no phases".into());
        }
        if let (Some(a), Some(b)) = (from, to) {
            if !e.phases.is_subset(a.phases.intersection(b.phases)) {
                bad(&e.id, "edge phases must be carried by both endpoints".into());
            }
        }
        for p in e.phases.iter() {
            let u = e.capacity[p.index()];
            if !(u.is_finite() && u > 0.0) {
                bad(&e.id, format!("capacity on phase {p} must be positive"));
            }
        }
        let costs = [e.build_cost, e.switch_cost, e.harden_cost, e.length_miles];
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            bad(&e.id, "costs and length must be finite and nonnegative".into());
        }
        if e.exists && e.build_cost != 0.0 {
            bad(&e.id, "existing line must have zero build cost".into());
        }
        if e.has_existing_switch && !e.exists {
            bad(&e.id, "an existing switch requires an existing line".into());
        }
        let beta = e.beta();
        if !(0.0..=1.0).contains(&beta) {
            bad(&e.id, "phase imbalance limit must lie in [0, 1]".into());
        }
    }
    out
}
