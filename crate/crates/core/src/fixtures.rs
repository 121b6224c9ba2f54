//! Small hand-checkable networks used by tests and examples.

use crate::grid::{Bus, Edge, GenerationSite, LoadBlock, NetworkInstance, PhaseSet};
use crate::scenario::{Scenario, ScenarioSet};

/// Three single-phase buses in a triangle. Bus `b0` holds the only
/// existing generation, `b1` a critical load and `b2` a non-critical load.
/// All lines exist, can be hardened for 10 and have no switch yet; `b1`
/// can host a facility for 50.
pub fn tri3() -> NetworkInstance {
    let mut inst = NetworkInstance {
        name: "tri3".into(),
        ..NetworkInstance::default()
    };
    let mut b0 = Bus::new("b0", PhaseSet::A);
    b0.generation = Some(GenerationSite {
        existing_capacity: [10.0, 0.0, 0.0],
        max_new_capacity: [0.0; 3],
        facility_cost: 0.0,
        capacity_cost: [0.0; 3],
    });
    let mut b1 = Bus::new("b1", PhaseSet::A);
    b1.is_critical = true;
    b1.load_blocks.push(LoadBlock { demand: [1.0, 0.0, 0.0] });
    b1.generation = Some(GenerationSite {
        existing_capacity: [0.0; 3],
        max_new_capacity: [2.0, 0.0, 0.0],
        facility_cost: 50.0,
        capacity_cost: [1.0, 0.0, 0.0],
    });
    let mut b2 = Bus::new("b2", PhaseSet::A);
    b2.load_blocks.push(LoadBlock { demand: [1.0, 0.0, 0.0] });
    inst.buses = vec![b0, b1, b2];
    for (id, from, to) in [("e01", "b0", "b1"), ("e02", "b0", "b2"), ("e12", "b1", "b2")] {
        let mut e = Edge::new(id, from, to, PhaseSet::A, 5.0);
        e.exists = true;
        e.hardenable = true;
        e.harden_cost = 10.0;
        e.switch_cost = 1.0;
        inst.edges.push(e);
    }
    inst
}

/// Scenario damaging both lines out of the source.
pub fn tri3_double_damage() -> ScenarioSet {
    ScenarioSet::user_provided(vec![Scenario {
        id: 0,
        damaged: vec![0, 1],
        hardened_damaged: vec![],
    }])
}

/// [`tri3`] with hardening `e01` at 12, and three scenarios: benign, one
/// cutting `e02` and `e12`, and one cutting both source lines. Only the
/// last one needs to join the decomposition; hardening `e02` then covers
/// all three.
pub fn tri3_dominance() -> (NetworkInstance, ScenarioSet) {
    let mut inst = tri3();
    inst.edges[0].harden_cost = 12.0;
    let scenarios = ScenarioSet::user_provided(vec![
        Scenario::benign(0),
        Scenario {
            id: 1,
            damaged: vec![1, 2],
            hardened_damaged: vec![],
        },
        Scenario {
            id: 2,
            damaged: vec![0, 1],
            hardened_damaged: vec![],
        },
    ]);
    (inst, scenarios)
}

/// [`tri3`] where `e12` is only a candidate line (build cost 4).
pub fn tri3_candidate() -> NetworkInstance {
    let mut inst = tri3();
    let e = &mut inst.edges[2];
    e.exists = false;
    e.hardenable = false;
    e.harden_cost = 0.0;
    e.build_cost = 4.0;
    inst
}

/// Two scenarios where each alone is cheapest to fix by hardening a line
/// of its own, while hardening the shared feeder line fixes both.
///
/// `b0` feeds a critical bus `b1` either directly (`e01`) or through the
/// junction `b3` (`e03`, then `e31`). Scenario 0 cuts `e01` and `e31`,
/// scenario 1 cuts `e01` and `e03`. Hardening `e01` (10) fixes both;
/// scenario 0 alone can also be fixed by hardening `e31` (10) and
/// scenario 1 by hardening `e03` (10).
pub fn shared_path() -> (NetworkInstance, ScenarioSet) {
    let mut inst = NetworkInstance {
        name: "shared_path".into(),
        ..NetworkInstance::default()
    };
    let mut b0 = Bus::new("b0", PhaseSet::A);
    b0.generation = Some(GenerationSite {
        existing_capacity: [10.0, 0.0, 0.0],
        max_new_capacity: [0.0; 3],
        facility_cost: 0.0,
        capacity_cost: [0.0; 3],
    });
    let mut b1 = Bus::new("b1", PhaseSet::A);
    b1.is_critical = true;
    b1.load_blocks.push(LoadBlock { demand: [1.0, 0.0, 0.0] });
    let b3 = Bus::new("b3", PhaseSet::A);
    inst.buses = vec![b0, b1, b3];
    for (id, from, to) in [("e31", "b3", "b1"), ("e03", "b0", "b3"), ("e01", "b0", "b1")] {
        let mut e = Edge::new(id, from, to, PhaseSet::A, 5.0);
        e.exists = true;
        e.hardenable = true;
        e.harden_cost = 10.0;
        e.has_existing_switch = true;
        inst.edges.push(e);
    }
    let scenarios = ScenarioSet::user_provided(vec![
        Scenario {
            id: 0,
            damaged: vec![0, 2],
            hardened_damaged: vec![],
        },
        Scenario {
            id: 1,
            damaged: vec![1, 2],
            hardened_damaged: vec![],
        },
    ]);
    (inst, scenarios)
}
