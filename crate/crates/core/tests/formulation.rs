use gridforge::algorithms::{brute_force_oracle, Problem};
use gridforge::cycles::enumerate_cycles;
use gridforge::fixtures::{tri3, tri3_double_damage};
use gridforge::formulation::{
    apply_chance_relaxation, build_master, build_pricing_model, build_scenario_block, price_scenario, Design,
    FirstStage, ServiceMode,
};
use gridforge::grid::{Bus, Edge, GenerationSite, LoadBlock, NetworkInstance, PhaseSet};
use gridforge::milp::{solve_mip, MipModel, Relation, SolveParams, SolveStatus};
use gridforge::scenario::{Scenario, ScenarioSet};
use gridforge::{random_case, DEFAULT_MAX_CYCLES};
use proptest::prelude::*;

fn count_vars(model: &MipModel, prefix: &str) -> usize {
    model.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
}

fn count_rows(model: &MipModel, prefix: &str) -> usize {
    model.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
}

fn exact() -> SolveParams {
    SolveParams {
        mip_gap: 0.0,
        ..SolveParams::default()
    }
}

#[test]
fn tri3_block_has_hand_counted_shape() {
    let inst = tri3();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let mut model = MipModel::new("block");
    let first = FirstStage::fixed(&Design::existing(&inst));
    build_scenario_block(&mut model, &inst, &Scenario::benign(0), &cycles, &first, ServiceMode::Required);
    assert_eq!(count_vars(&model, "s0.line_used."), 3);
    assert_eq!(count_vars(&model, "s0.switch_open."), 3);
    assert_eq!(count_vars(&model, "s0.flow."), 3);
    assert_eq!(count_vars(&model, "s0.block."), 2);
    assert_eq!(count_rows(&model, "s0.radial_cycle."), 1);
}

#[test]
fn unrecoverable_damage_forces_line_out() {
    let inst = tri3();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let scenario = Scenario {
        id: 0,
        damaged: vec![0],
        hardened_damaged: vec![0],
    };
    let mut design = Design::existing(&inst);
    design.hardened[0] = true;
    let mut pm = build_pricing_model(&inst, &scenario, &design, &cycles).unwrap();
    let lu = pm.vars.line_used[0];
    pm.model.add_constraint("probe", vec![(lu, 1.0)], Relation::Ge, 1.0);
    assert_eq!(solve_mip(&pm.model, &exact()).status, SolveStatus::Infeasible);
}

#[test]
fn hardened_damaged_line_can_still_operate() {
    let inst = tri3();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let scenario = Scenario {
        id: 0,
        damaged: vec![0],
        hardened_damaged: vec![],
    };
    let mut design = Design::existing(&inst);
    design.hardened[0] = true;
    let mut pm = build_pricing_model(&inst, &scenario, &design, &cycles).unwrap();
    let lu = pm.vars.line_used[0];
    pm.model.add_constraint("probe", vec![(lu, 1.0)], Relation::Ge, 1.0);
    assert_eq!(solve_mip(&pm.model, &exact()).status, SolveStatus::Optimal);
}

/// Source `b0` feeding load bus `b1` over one three-phase line.
fn two_bus(demand: [f64; 3], beta: f64) -> NetworkInstance {
    let mut inst = NetworkInstance {
        name: "two_bus".into(),
        ..NetworkInstance::default()
    };
    let mut b0 = Bus::new("b0", PhaseSet::ABC);
    b0.generation = Some(GenerationSite {
        existing_capacity: [10.0; 3],
        max_new_capacity: [0.0; 3],
        facility_cost: 0.0,
        capacity_cost: [0.0; 3],
    });
    let mut b1 = Bus::new("b1", PhaseSet::ABC);
    b1.is_critical = true;
    b1.load_blocks.push(LoadBlock { demand });
    inst.buses = vec![b0, b1];
    let mut e = Edge::new("e01", "b0", "b1", PhaseSet::ABC, 10.0);
    e.exists = true;
    e.phase_imbalance_limit = Some(beta);
    inst.edges.push(e);
    inst
}

fn price_two_bus(demand: [f64; 3], beta: f64) -> gridforge::formulation::PricingResult {
    let inst = two_bus(demand, beta);
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let design = Design::existing(&inst);
    price_scenario(&inst, &Scenario::benign(0), &design, &cycles, &exact()).unwrap()
}

#[test]
fn zero_imbalance_limit_equalises_phase_flows() {
    let r = price_two_bus([2.0, 2.0, 2.0], 0.0);
    assert_eq!(r.l_value, 0.0);
    let f = r.operation.flow[0];
    assert!(f[0].abs() > 1.0);
    assert!((f[0] - f[1]).abs() < 1e-6 && (f[1] - f[2]).abs() < 1e-6, "{f:?}");
}

#[test]
fn zero_imbalance_limit_blocks_unbalanced_load() {
    assert!((price_two_bus([1.0, 2.0, 3.0], 0.0).l_value - 0.98).abs() < 1e-9);
    assert_eq!(price_two_bus([1.0, 2.0, 3.0], 1.0).l_value, 0.0);
}

#[test]
fn reverse_flow_respects_imbalance_band() {
    // the source sits at the `to` end, so flow is negative
    let mut inst = two_bus([2.0, 2.2, 1.9], 0.15);
    inst.edges[0].from = "b1".into();
    inst.edges[0].to = "b0".into();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let r = price_scenario(&inst, &Scenario::benign(0), &Design::existing(&inst), &cycles, &exact()).unwrap();
    assert_eq!(r.l_value, 0.0);
    let f = r.operation.flow[0];
    let avg = f.iter().sum::<f64>() / 3.0;
    assert!(avg < 0.0);
    for v in f {
        assert!(v <= 0.85 * avg + 1e-6 && v >= 1.15 * avg - 1e-6, "{f:?}");
    }
}

#[test]
fn benign_pricing_of_existing_grid_is_zero() {
    let inst = tri3();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let r = price_scenario(&inst, &Scenario::benign(0), &Design::existing(&inst), &cycles, &exact()).unwrap();
    assert_eq!(r.l_value, 0.0);
    assert_eq!(r.served_critical_fraction, 1.0);
}

#[test]
fn isolated_critical_bus_prices_at_the_critical_target() {
    let inst = tri3();
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let cut = Scenario {
        id: 0,
        damaged: vec![0, 2],
        hardened_damaged: vec![],
    };
    let r = price_scenario(&inst, &cut, &Design::existing(&inst), &cycles, &exact()).unwrap();
    assert!((r.l_value - 0.98).abs() < 1e-12);
    assert_eq!(r.served_critical_fraction, 0.0);
    assert_eq!(r.served_total_fraction, 1.0);

    let mut design = Design::existing(&inst);
    design.hardened[0] = true;
    let r = price_scenario(&inst, &cut, &design, &cycles, &exact()).unwrap();
    assert_eq!(r.l_value, 0.0);
}

fn master_objective(inst: &NetworkInstance, scenarios: &[Scenario], budget: Option<usize>) -> (Option<f64>, Vec<usize>) {
    let cycles = enumerate_cycles(inst, DEFAULT_MAX_CYCLES).unwrap();
    let mut master = build_master(inst, scenarios, &cycles).unwrap();
    if let Some(b) = budget {
        apply_chance_relaxation(&mut master, b);
    }
    let sol = solve_mip(&master.model, &exact());
    let excused = if sol.has_solution() {
        master.excused(&sol.values)
    } else {
        Vec::new()
    };
    (sol.objective, excused)
}

#[test]
fn master_examples() {
    let inst = tri3();
    assert_eq!(master_objective(&inst, &[Scenario::benign(0)], None).0, Some(0.0));
    let damage = tri3_double_damage();
    assert_eq!(master_objective(&inst, &damage.scenarios, None).0, Some(10.0));
    assert_eq!(master_objective(&inst, &[], None).0, Some(0.0));
}

#[test]
fn chance_budget_examples() {
    let inst = tri3();
    let scenarios = vec![
        Scenario {
            id: 0,
            damaged: vec![0, 1],
            hardened_damaged: vec![],
        },
        Scenario::benign(1),
    ];
    assert_eq!(master_objective(&inst, &scenarios, Some(0)).0, Some(10.0));
    assert_eq!(master_objective(&inst, &scenarios, None).0, Some(10.0));
    let (obj, excused) = master_objective(&inst, &scenarios, Some(1));
    assert_eq!(obj, Some(0.0));
    assert_eq!(excused, vec![0]);

    let set = ScenarioSet::user_provided(scenarios);
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    assert_eq!(brute_force_oracle(&p, 0.5).unwrap().objective, Some(0.0));
    assert_eq!(brute_force_oracle(&p, 0.0).unwrap().objective, Some(10.0));
    // everything excusable
    assert_eq!(master_objective(&inst, &set.scenarios, Some(2)).0, Some(0.0));
}

#[test]
fn every_constraint_family_is_emitted() {
    let inst = gridforge::synthetic::generate_synthetic(gridforge::synthetic::Profile::Urban, 1, 6, 5).unwrap();
    let damaged: Vec<usize> = (0..inst.edges.len()).filter(|&e| inst.edges[e].hardenable).take(2).collect();
    let scenario = Scenario {
        id: 0,
        hardened_damaged: damaged[..1].to_vec(),
        damaged,
    };
    let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
    let mut master = build_master(&inst, &[scenario], &cycles).unwrap();
    apply_chance_relaxation(&mut master, 0);
    for family in [
        "flow_cap_hi",
        "flow_cap_lo",
        "direction",
        "switch_block_hi",
        "switch_block_lo",
        "phase_balance_lo_pos",
        "phase_balance_hi_neg",
        "damage",
        "damage_hardened",
        "load_served",
        "gen_limit",
        "node_balance",
        "capacity_limit",
        "radial_cycle",
        "cycle_line_link",
        "cycle_switch_cap",
        "cycle_switch_link",
        "switch_needs_line",
        "critical_service",
        "total_service",
        "link_line",
        "link_switch",
        "link_harden",
        "link_facility",
        "link_capacity",
    ] {
        assert!(count_rows(&master.model, &format!("s0.{family}")) > 0, "no {family} rows");
    }
    assert_eq!(count_rows(&master.model, "chance_budget"), 1);
    // every referenced variable is declared, and names are unique
    let n = master.model.variables.len();
    assert!(master.model.constraints.iter().all(|c| c.terms.iter().all(|(v, _)| v.0 < n)));
    let mut names: Vec<&str> = master.model.variables.iter().map(|v| v.name.as_str()).collect();
    names.sort_unstable();
    let before = names.len();
    names.dedup();
    assert_eq!(names.len(), before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn master_solutions_respect_linking(seed in 0u64..1000) {
        let (inst, set) = random_case(seed);
        let cycles = enumerate_cycles(&inst, DEFAULT_MAX_CYCLES).unwrap();
        let master = build_master(&inst, &set.scenarios, &cycles).unwrap();
        let sol = solve_mip(&master.model, &exact());
        prop_assert!(sol.has_solution());
        let design = master.design(&sol.values);
        for op in master.operations(&sol.values) {
            for e in 0..inst.edges.len() {
                let available = inst.edges[e].exists || design.line_built[e];
                prop_assert!(!op.line_used[e] || available);
                let switch = inst.edges[e].has_existing_switch || design.switch_built[e];
                prop_assert!(!op.switch_open[e] || switch);
                prop_assert!(!op.harden_used[e] || design.hardened[e]);
                for k in 0..3 {
                    if op.switch_open[e] || !op.line_used[e] {
                        prop_assert!(op.flow[e][k].abs() < 1e-6);
                    }
                }
            }
            for (i, used) in op.facility_used.iter().enumerate() {
                prop_assert!(!used || design.facility_built[i]);
                for k in 0..3 {
                    prop_assert!(op.capacity_use[i][k] <= design.new_capacity[i][k] + 1e-6);
                }
            }
        }
    }

    #[test]
    fn critical_target_is_monotone(seed in 0u64..1000) {
        let (mut inst, set) = random_case(seed);
        let mut last = f64::NEG_INFINITY;
        for lambda in [0.3, 0.6, 0.98] {
            inst.critical_fraction = lambda;
            let (obj, _) = master_objective(&inst, &set.scenarios, None);
            let obj = obj.unwrap();
            prop_assert!(obj >= last - 1e-6);
            last = obj;
        }
    }
}
