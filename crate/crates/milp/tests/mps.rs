mod common;

use common::{close, golden_model, random_model};
use gridforge_milp::{
    export_mps, parse_mps, read_solution, solve_mip, write_solution, Model, Relation, Sense, SolveParams,
    VarKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn export_matches_golden_file() {
    let text = export_mps(&golden_model()).unwrap();
    let golden = include_str!("fixtures/golden.mps");
    assert_eq!(text, golden);
}

#[test]
fn golden_file_parses_back_to_the_model() {
    let parsed = parse_mps(include_str!("fixtures/golden.mps")).unwrap();
    let original = golden_model();
    assert_eq!(parsed.variables, original.variables);
    assert_eq!(parsed.constraints, original.constraints);
    assert_eq!(parsed.objective, original.objective);
}

#[test]
fn maximisation_writes_objsense() {
    let mut m = golden_model();
    m.objective.sense = Sense::Maximize;
    let text = export_mps(&m).unwrap();
    assert!(text.contains("OBJSENSE\n    MAX\nROWS\n"));
    assert_eq!(parse_mps(&text).unwrap().objective.sense, Sense::Maximize);
}

#[test]
fn names_are_sanitised_in_output() {
    let mut m = Model::<f64>::new("with space");
    let a = m.add_continuous("flow e1", Some(0.0), Some(1.0));
    m.add_constraint("*cap", vec![(a, 1.0)], Relation::Le, 1.0);
    let text = export_mps(&m).unwrap();
    assert!(text.starts_with("NAME          with_space\n"));
    assert!(text.contains(" L  _cap\n"));
    assert!(text.contains("    flow_e1   _cap"));
}

#[test]
fn solution_file_round_trip_through_solver() {
    let m = golden_model();
    let sol = solve_mip(&m, &SolveParams::default());
    let text = write_solution(&m, &sol.values);
    let back = read_solution(&m, &text).unwrap();
    assert_eq!(back, sol.values.iter().map(|v| if *v == 0.0 { 0.0 } else { *v }).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn export_parse_export_is_stable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = random_model(&mut rng, 4, 3, 4);
        // interleave kinds so that several marker blocks are needed
        model.variables.swap(1, 5);
        let first = export_mps(&model).unwrap();
        let parsed = parse_mps(&first).unwrap();
        prop_assert_eq!(&export_mps(&parsed).unwrap(), &first);
        for (a, b) in parsed.variables.iter().zip(&model.variables) {
            prop_assert_eq!(a.kind == VarKind::Binary, b.kind == VarKind::Binary);
        }
        let s1 = solve_mip(&model, &SolveParams::default());
        let s2 = solve_mip(&parsed, &SolveParams::default());
        prop_assert_eq!(s1.status, s2.status);
        if let (Some(a), Some(b)) = (s1.objective, s2.objective) {
            prop_assert!(close(a, b, 1e-9));
        }
    }
}
