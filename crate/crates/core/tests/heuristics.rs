use gridforge::algorithms::{
    repair_switches, run_algorithm, solve_greedy, solve_sbvnds, solve_vns, AlgoParams, Algorithm, Problem,
    ReportStatus,
};
use gridforge::fixtures::{shared_path, tri3};
use gridforge::formulation::Design;
use gridforge::scenario::{Scenario, ScenarioSet};
use gridforge::{random_case, DEFAULT_MAX_CYCLES};
use proptest::prelude::*;

fn benign() -> ScenarioSet {
    ScenarioSet::user_provided(vec![Scenario::benign(0)])
}

#[test]
fn repair_adds_the_lowest_index_switch_on_a_loop() {
    let inst = tri3();
    let set = benign();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let repaired = repair_switches(&p, &Design::existing(&inst)).unwrap();
    assert_eq!(repaired.switch_built, vec![true, false, false]);
    assert_eq!(repair_switches(&p, &repaired).unwrap(), repaired);
}

#[test]
fn repair_leaves_radial_designs_alone() {
    let mut inst = tri3();
    inst.edges.pop();
    let set = benign();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let design = Design::existing(&inst);
    assert_eq!(repair_switches(&p, &design).unwrap(), design);
}

#[test]
fn vns_drops_a_switch_the_master_does_not_need() {
    let inst = tri3();
    let set = benign();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let mut start = Design::existing(&inst);
    start.switch_built[0] = true;
    let r = solve_vns(&p, &start, &AlgoParams::default()).unwrap();
    // the master may leave a line unused instead of opening a switch
    assert_eq!(r.objective, Some(0.0));
    assert_eq!(r.status, ReportStatus::Optimal);
    assert!(r.violated().is_empty());
}

#[test]
fn sbvnds_finds_the_shared_line() {
    let (inst, set) = shared_path();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let r = solve_sbvnds(&p, &AlgoParams::default()).unwrap();
    assert_eq!(r.objective, Some(10.0));
    assert!(r.design.unwrap().hardened[2]);
}

#[test]
fn standalone_vns_starts_from_greedy() {
    let (inst, set) = shared_path();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let r = run_algorithm(Algorithm::Vns, &p, &AlgoParams::default()).unwrap();
    assert_eq!(r.algorithm, "vns");
    assert_eq!(r.objective, Some(10.0));
    assert!(matches!(r.status, ReportStatus::Optimal | ReportStatus::Feasible));
}

#[test]
fn algorithm_names_round_trip() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
    assert!("simplex".parse::<Algorithm>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn repair_is_idempotent_and_keeps_feasibility(seed in 0u64..10_000) {
        let (inst, set) = random_case(seed);
        let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
        let greedy = solve_greedy(&p, &AlgoParams::default()).unwrap();
        let Some(design) = &greedy.design else { return Ok(()) };
        let again = repair_switches(&p, design).unwrap();
        prop_assert_eq!(&again, design);
        prop_assert!(greedy.violated().is_empty());
    }

    #[test]
    fn vns_never_worsens_its_start(seed in 0u64..10_000) {
        let (inst, set) = random_case(seed);
        let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
        let greedy = solve_greedy(&p, &AlgoParams::default()).unwrap();
        let Some(design) = greedy.design else { return Ok(()) };
        let v = solve_vns(&p, &design, &AlgoParams::default()).unwrap();
        prop_assert!(v.objective.unwrap() <= greedy.objective.unwrap() + 1e-9);
        prop_assert!(v.violated().is_empty());
    }
}
