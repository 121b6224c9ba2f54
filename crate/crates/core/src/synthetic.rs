//! Seeded instance generators: multi-feeder networks in an urban or rural
//! profile, and the small random cases used for exhaustive cross-checks.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::formulation::{price_scenario, Design};
use crate::grid::{Bus, Edge, GenerationSite, LoadBlock, NetworkInstance, Phase, PhaseSet};
use crate::cycles::enumerate_cycles;
use crate::scenario::{Scenario, ScenarioSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Urban,
    Rural,
}

impl Profile {
    /// Range of line lengths in miles.
    pub fn length_range(self) -> (f64, f64) {
        match self {
            Profile::Urban => (0.1, 0.5),
            Profile::Rural => (1.0, 5.0),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Urban => "urban",
            Profile::Rural => "rural",
        })
    }
}

impl FromStr for Profile {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "urban" => Ok(Profile::Urban),
            "rural" => Ok(Profile::Rural),
            other => Err(GridError::UnknownId {
                kind: "profile",
                id: other.to_string(),
            }),
        }
    }
}

/// Cost of building one mile of new line.
pub const BUILD_COST_PER_MILE: f64 = 100.0;
/// Cost of hardening one mile of existing line.
pub const HARDEN_COST_PER_MILE: f64 = 50.0;
pub const SWITCH_COST: f64 = 5.0;
pub const FACILITY_COST: f64 = 200.0;
pub const CAPACITY_COST: f64 = 20.0;

fn bus_name(feeder: usize, j: usize) -> String {
    format!("f{feeder}b{j}")
}

/// Feeders hang off one three-phase source each and grow as random trees.
/// Laterals are single-phase with some probability. Critical buses get
/// candidate generation sites, and consecutive feeders get candidate
/// tie-lines.
pub fn generate_synthetic(profile: Profile, n_feeders: usize, buses_per_feeder: usize, seed: u64) -> Result<NetworkInstance, GridError> {
    if n_feeders == 0 || buses_per_feeder == 0 {
        return Err(GridError::Domain("need at least one feeder with one bus".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = profile.length_range();
    let mut inst = NetworkInstance {
        name: format!("{profile}_{n_feeders}x{buses_per_feeder}_seed{seed}"),
        ..NetworkInstance::default()
    };
    let mut feeder_buses: Vec<Vec<usize>> = Vec::new();
    let mut parent_of = Vec::new();

    for f in 0..n_feeders {
        let first = inst.buses.len();
        let mut members = Vec::new();
        let mut phases: Vec<PhaseSet> = Vec::new();
        for j in 0..buses_per_feeder {
            let parent = (j > 0).then(|| rng.gen_range(0..j));
            let ph = match parent {
                None => PhaseSet::ABC,
                Some(p) if phases[p] == PhaseSet::ABC && rng.gen_bool(0.7) => PhaseSet::ABC,
                Some(p) if phases[p] == PhaseSet::ABC => PhaseSet::from_phases(&[*Phase::ALL.choose(&mut rng).unwrap()]),
                Some(p) => phases[p],
            };
            phases.push(ph);
            let mut bus = Bus::new(bus_name(f, j), ph);
            if j > 0 {
                let blocks = rng.gen_range(1..=2);
                for _ in 0..blocks {
                    let mut demand = [0.0; 3];
                    for p in ph.iter() {
                        demand[p.index()] = (rng.gen_range(1..=10) as f64) / 10.0;
                    }
                    bus.load_blocks.push(LoadBlock { demand });
                }
                bus.is_critical = rng.gen_bool(0.2);
            }
            inst.buses.push(bus);
            members.push(first + j);
            parent_of.push(parent.map(|p| first + p));
        }

        // source sized to carry the whole feeder
        let mut supply = [0.0; 3];
        for &i in &members {
            for p in Phase::ALL {
                supply[p.index()] += inst.buses[i].demand(p);
            }
        }
        let source = &mut inst.buses[first];
        source.generation = Some(GenerationSite {
            existing_capacity: supply.map(|s: f64| (s * 1.2 * 10.0).ceil() / 10.0),
            max_new_capacity: [0.0; 3],
            facility_cost: 0.0,
            capacity_cost: [0.0; 3],
        });
        let line_capacity = supply.iter().cloned().fold(0.0, f64::max) * 2.0 + 1.0;

        for j in 1..buses_per_feeder {
            let child = first + j;
            let parent = parent_of[child].expect("non-root bus has a parent");
            let length = round2(rng.gen_range(lo..=hi));
            let ph = inst.buses[child].phases;
            let mut e = Edge::new(
                format!("{}-{}", inst.buses[parent].id, inst.buses[child].id),
                inst.buses[parent].id.clone(),
                inst.buses[child].id.clone(),
                ph,
                line_capacity,
            );
            e.length_miles = length;
            e.exists = true;
            e.hardenable = true;
            e.harden_cost = round2(HARDEN_COST_PER_MILE * length);
            e.switch_cost = SWITCH_COST;
            inst.edges.push(e);
        }

        for &i in &members[1..] {
            let bus = &mut inst.buses[i];
            if bus.is_critical {
                let mut max_new = [0.0; 3];
                for p in bus.phases.iter() {
                    max_new[p.index()] = round2(bus.demand(p) * 1.5);
                }
                bus.generation = Some(GenerationSite {
                    existing_capacity: [0.0; 3],
                    max_new_capacity: max_new,
                    facility_cost: FACILITY_COST,
                    capacity_cost: [CAPACITY_COST; 3],
                });
            }
        }
        feeder_buses.push(members);
    }

    let add_candidate = |inst: &mut NetworkInstance, a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let ph = inst.buses[a].phases.intersection(inst.buses[b].phases);
        if ph.is_empty() {
            return false;
        }
        let length = round2(rng.gen_range(lo..=hi) * 2.0);
        let cap = inst.edges.first().map_or(10.0, |e| e.capacity.iter().cloned().fold(0.0, f64::max));
        let mut e = Edge::new(
            format!("tie-{}-{}", inst.buses[a].id, inst.buses[b].id),
            inst.buses[a].id.clone(),
            inst.buses[b].id.clone(),
            ph,
            cap,
        );
        e.length_miles = length;
        e.build_cost = round2(BUILD_COST_PER_MILE * length);
        e.switch_cost = SWITCH_COST;
        inst.edges.push(e);
        true
    };

    if n_feeders == 1 {
        // a single feeder gets one loop-closing candidate when it can
        let members = &feeder_buses[0];
        let pairs: Vec<(usize, usize)> = members
            .iter()
            .flat_map(|&a| members.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a < b && parent_of[b] != Some(a))
            .collect();
        for &(a, b) in pairs.iter().rev() {
            if add_candidate(&mut inst, a, b, &mut rng) {
                break;
            }
        }
    } else {
        for f in 0..n_feeders - 1 {
            let (left, right) = (&feeder_buses[f], &feeder_buses[f + 1]);
            let mut tries = 0;
            loop {
                // leaves first, falling back to the three-phase sources
                let (a, b) = if tries < 20 {
                    (*left.choose(&mut rng).unwrap(), *right.choose(&mut rng).unwrap())
                } else {
                    (left[0], right[0])
                };
                if add_candidate(&mut inst, a, b, &mut rng) {
                    break;
                }
                tries += 1;
            }
        }
    }
    Ok(inst)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Limits of [`random_case`].
pub const CASE_MAX_BUSES: usize = 6;
pub const CASE_MAX_EDGES: usize = 9;
pub const CASE_MAX_BINARIES: usize = 12;
pub const CASE_MAX_SCENARIOS: usize = 3;

/// A small random instance with integer data and up to three scenarios,
/// feasible once every upgrade is built.
///
/// Existing lines come with switches, so the free binaries are hardening,
/// candidate lines with their switches, and at most one facility.
pub fn random_case(seed: u64) -> (NetworkInstance, ScenarioSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=CASE_MAX_BUSES);
    let phases = if rng.gen_bool(0.3) { PhaseSet::ABC } else { PhaseSet::A };
    let mut inst = NetworkInstance {
        name: format!("case{seed}"),
        ..NetworkInstance::default()
    };
    let mut total = [0.0; 3];
    for i in 0..n {
        let mut bus = Bus::new(format!("b{i}"), phases);
        if i > 0 {
            for _ in 0..rng.gen_range(1..=2) {
                let mut demand = [0.0; 3];
                for p in phases.iter() {
                    demand[p.index()] = rng.gen_range(1..=3) as f64;
                    total[p.index()] += demand[p.index()];
                }
                bus.load_blocks.push(LoadBlock { demand });
            }
            bus.is_critical = rng.gen_bool(0.4);
        }
        inst.buses.push(bus);
    }
    inst.buses[0].generation = Some(GenerationSite {
        existing_capacity: total,
        max_new_capacity: [0.0; 3],
        facility_cost: 0.0,
        capacity_cost: [0.0; 3],
    });
    let cap = total.iter().cloned().fold(0.0, f64::max) + 1.0;
    let mut binaries = 0;
    let mut adjacent = vec![vec![false; n]; n];
    for i in 1..n {
        let j = rng.gen_range(0..i);
        adjacent[i][j] = true;
        adjacent[j][i] = true;
        let mut e = Edge::new(format!("e{j}_{i}"), format!("b{j}"), format!("b{i}"), phases, cap);
        e.exists = true;
        e.has_existing_switch = true;
        if rng.gen_bool(0.75) {
            e.hardenable = true;
            e.harden_cost = rng.gen_range(1..=10) as f64;
            binaries += 1;
        }
        inst.edges.push(e);
    }
    if rng.gen_bool(0.5) {
        let i = rng.gen_range(1..n);
        let g = GenerationSite {
            existing_capacity: [0.0; 3],
            max_new_capacity: inst.buses[i].load_blocks.iter().fold([0.0; 3], |mut acc, b| {
                for k in 0..3 {
                    acc[k] += b.demand[k];
                }
                acc
            }),
            facility_cost: rng.gen_range(5..=15) as f64,
            capacity_cost: if rng.gen_bool(0.5) { [1.0; 3] } else { [0.0; 3] },
        };
        inst.buses[i].generation = Some(g);
        binaries += 1;
    }
    let extra = rng.gen_range(0..=3);
    for _ in 0..extra {
        if inst.edges.len() >= CASE_MAX_EDGES || binaries + 2 > CASE_MAX_BINARIES {
            break;
        }
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || adjacent[a][b] {
            continue;
        }
        adjacent[a][b] = true;
        adjacent[b][a] = true;
        let (a, b) = (a.min(b), a.max(b));
        let mut e = Edge::new(format!("c{a}_{b}"), format!("b{a}"), format!("b{b}"), phases, cap);
        e.build_cost = rng.gen_range(1..=10) as f64;
        e.switch_cost = rng.gen_range(1..=3) as f64;
        inst.edges.push(e);
        binaries += 2;
    }

    let count = rng.gen_range(1..=CASE_MAX_SCENARIOS);
    let m = inst.edges.len();
    let mut scenarios: Vec<Scenario> = (0..count)
        .map(|id| {
            let mut s = Scenario::benign(id);
            for k in 0..m {
                if rng.gen_bool(0.4) {
                    s.damaged.push(k);
                    if rng.gen_bool(0.15) {
                        s.hardened_damaged.push(k);
                    }
                }
            }
            s
        })
        .collect();

    // drop damage the full design cannot survive
    let cycles = enumerate_cycles(&inst, 10_000).expect("tiny graphs have few cycles");
    let everything = Design::everything(&inst);
    let params = gridforge_milp::SolveParams::default();
    for s in scenarios.iter_mut() {
        let feasible = |s: &Scenario| {
            price_scenario(&inst, s, &everything, &cycles, &params).is_ok_and(|r| r.is_feasible())
        };
        if !feasible(s) {
            s.hardened_damaged.clear();
        }
        if !feasible(s) {
            s.damaged.clear();
        }
    }
    (inst, ScenarioSet::user_provided(scenarios))
}
