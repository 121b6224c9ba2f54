mod common;

use common::{close, enumerate_optimum, q, random_model, to_f64};
use gridforge_milp::{
    solve_lp, solve_mip, BigRational, Model, Relation, Sense, SolveParams, SolveStatus, VarId,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_against_oracle(model: &Model<f64>) {
    let oracle = enumerate_optimum(model);
    let sol = solve_mip(model, &SolveParams { mip_gap: 0.0, ..SolveParams::default() });
    match oracle {
        None => assert_eq!(sol.status, SolveStatus::Infeasible, "{model:?}"),
        Some(best) => {
            assert_eq!(sol.status, SolveStatus::Optimal, "{model:?}");
            let got = sol.objective.unwrap();
            assert!(close(got, to_f64(&best), 1e-6), "got {got}, oracle {best}");
            assert!(model.max_violation(&sol.values) <= 1e-6);
            assert!(model.max_integrality_violation(&sol.values) <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lp_optimum_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 0, 3, 4);
        let oracle = enumerate_optimum(&model);
        let sol = solve_lp(&model, &SolveParams::default());
        match oracle {
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                prop_assert!(close(sol.objective.unwrap(), to_f64(&best), 1e-7));
            }
        }
    }

    #[test]
    fn exact_lp_is_exactly_the_vertex_optimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 0, 3, 4);
        let oracle = enumerate_optimum(&model);
        let exact: Model<BigRational> = model.convert();
        let sol = solve_lp(&exact, &SolveParams::default());
        match oracle {
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                prop_assert_eq!(sol.objective.unwrap(), best);
                prop_assert_eq!(exact.max_violation(&sol.values), q(0));
            }
        }
    }

    #[test]
    fn mip_optimum_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_bin = 1 + (seed % 10) as usize;
        let n_cont = (seed / 10 % 3) as usize;
        let model = random_model(&mut rng, n_bin, n_cont, 3 + (seed / 30 % 4) as usize);
        check_against_oracle(&model);
    }

    #[test]
    fn exact_mip_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4, 2, 4);
        let oracle = enumerate_optimum(&model);
        let exact: Model<BigRational> = model.convert();
        let sol = solve_mip(&exact, &SolveParams { mip_gap: 0.0, ..SolveParams::default() });
        match oracle {
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            Some(best) => prop_assert_eq!(sol.objective.unwrap(), best),
        }
    }
}

#[test]
fn bound_fixing_equals_equality_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for round in 0..200 {
        if checked == 20 {
            break;
        }
        let model = random_model(&mut rng, 6, 2, 4);
        let base = solve_mip(&model, &SolveParams::default());
        if base.status != SolveStatus::Optimal {
            continue;
        }
        // fix the first three binaries to the complement of the optimum's
        let fixes: Vec<(VarId, f64)> = (0..3).map(|j| (VarId(j), 1.0 - base.values[j].round())).collect();
        let by_bounds = model.fix_assignment(&fixes).unwrap();
        let mut by_rows = model.clone();
        for (v, x) in &fixes {
            by_rows.add_constraint(format!("fix{}", v.0), vec![(*v, 1.0)], Relation::Eq, *x);
        }
        let a = solve_mip(&by_bounds, &SolveParams::default());
        let b = solve_mip(&by_rows, &SolveParams::default());
        assert_eq!(a.status, b.status, "round {round}");
        if a.status == SolveStatus::Optimal {
            assert!(close(a.objective.unwrap(), b.objective.unwrap(), 1e-7));
        }
        checked += 1;
    }
    assert_eq!(checked, 20);
}

#[test]
fn knapsack_matches_dynamic_programming() {
    let weights = [12, 7, 11, 8, 9, 6, 5, 14, 3, 10];
    let profits = [24, 13, 23, 15, 16, 11, 8, 30, 4, 19];
    let cap = 40usize;
    let mut dp = vec![0i64; cap + 1];
    for (w, p) in weights.iter().zip(profits) {
        for c in (*w..=cap).rev() {
            dp[c] = dp[c].max(dp[c - w] + p);
        }
    }
    let mut m = Model::<f64>::new("knap");
    let xs: Vec<VarId> = (0..weights.len()).map(|i| m.add_binary(format!("x{i}"))).collect();
    m.add_constraint(
        "cap",
        xs.iter().zip(weights).map(|(x, w)| (*x, w as f64)).collect(),
        Relation::Le,
        cap as f64,
    );
    m.set_objective(Sense::Maximize, xs.iter().zip(profits).map(|(x, p)| (*x, p as f64)).collect());
    let sol = solve_mip(&m, &SolveParams { mip_gap: 0.0, ..SolveParams::default() });
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_eq!(sol.objective.unwrap(), dp[cap] as f64);
    assert!(sol.bound.unwrap() >= sol.objective.unwrap() - 1e-9);

    let exact: Model<BigRational> = m.convert();
    let sol = solve_mip(&exact, &SolveParams { mip_gap: 0.0, ..SolveParams::default() });
    assert_eq!(sol.objective.unwrap(), q(dp[cap]));
}

#[test]
fn single_precision_solves_a_small_model() {
    let mut m = Model::<f32>::new("f32");
    let x = m.add_continuous("x", Some(0.0), None);
    let y = m.add_binary("y");
    m.add_constraint("c", vec![(x, 1.0), (y, 2.0)], Relation::Ge, 3.0);
    m.add_constraint("d", vec![(x, 1.0)], Relation::Le, 2.5);
    m.set_objective(Sense::Minimize, vec![(x, 1.0), (y, 0.75)]);
    let sol = solve_mip(&m, &SolveParams::default());
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective.unwrap() - 1.75).abs() < 1e-5);
}

#[test]
fn detects_unbounded_and_infeasible() {
    let mut m = Model::<f64>::new("u");
    let x = m.add_continuous("x", Some(0.0), None);
    let y = m.add_binary("y");
    m.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Relation::Ge, 0.0);
    m.set_objective(Sense::Maximize, vec![(x, 1.0)]);
    assert_eq!(solve_lp(&m, &SolveParams::default()).status, SolveStatus::Unbounded);
    assert_eq!(solve_mip(&m, &SolveParams::default()).status, SolveStatus::Unbounded);

    let mut m = Model::<f64>::new("i");
    let a = m.add_binary("a");
    let b = m.add_binary("b");
    m.add_constraint("c", vec![(a, 1.0), (b, 1.0)], Relation::Eq, 1.0);
    m.add_constraint("d", vec![(a, 2.0), (b, 2.0)], Relation::Ge, 3.0);
    assert_eq!(solve_mip(&m, &SolveParams::default()).status, SolveStatus::Infeasible);
    // relaxation feasible, integer infeasible
    let mut m = Model::<f64>::new("frac");
    let a = m.add_binary("a");
    let b = m.add_binary("b");
    m.add_constraint("c", vec![(a, 2.0), (b, 2.0)], Relation::Eq, 1.0);
    assert_eq!(solve_lp(&m, &SolveParams::default()).status, SolveStatus::Optimal);
    assert_eq!(solve_mip(&m, &SolveParams::default()).status, SolveStatus::Infeasible);
}

#[test]
fn cutoff_rejects_solutions_that_are_not_better() {
    let mut m = Model::<f64>::new("cut");
    let xs: Vec<VarId> = (0..4).map(|i| m.add_binary(format!("x{i}"))).collect();
    m.add_constraint("pick2", xs.iter().map(|x| (*x, 1.0)).collect(), Relation::Ge, 2.0);
    m.set_objective(Sense::Minimize, xs.iter().zip([3.0, 5.0, 4.0, 6.0]).map(|(x, c)| (*x, c)).collect());
    let free = solve_mip(&m, &SolveParams::default());
    assert_eq!(free.objective, Some(7.0));
    let tight = solve_mip(&m, &SolveParams { cutoff: Some(7.0), ..SolveParams::default() });
    assert_eq!(tight.status, SolveStatus::Infeasible);
    let loose = solve_mip(&m, &SolveParams { cutoff: Some(8.5), ..SolveParams::default() });
    assert_eq!(loose.objective, Some(7.0));
}

#[test]
fn zero_time_limit_stops_immediately() {
    // a feasible model that needs branching
    let model = (0..)
        .map(|seed| random_model(&mut ChaCha8Rng::seed_from_u64(seed), 10, 2, 6))
        .find(|m| solve_mip(m, &SolveParams::default()).node_count > 1)
        .unwrap();
    let sol = solve_mip(&model, &SolveParams::default().with_time_limit(0.0));
    assert_eq!(sol.status, SolveStatus::TimeLimit);
    assert_eq!(sol.node_count, 0);
}

#[test]
fn node_limit_reports_status_and_valid_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let model = random_model(&mut rng, 10, 0, 6);
    let full = solve_mip(&model, &SolveParams::default());
    let limited = solve_mip(&model, &SolveParams { node_limit: 2, ..SolveParams::default() });
    assert!(limited.node_count <= 2);
    if full.status == SolveStatus::Optimal && limited.status == SolveStatus::NodeLimit {
        if let Some(b) = limited.bound {
            let opt = full.objective.unwrap();
            match model.objective.sense {
                Sense::Minimize => assert!(b <= opt + 1e-9),
                Sense::Maximize => assert!(b >= opt - 1e-9),
            }
        }
    }
}

#[test]
fn repeated_solves_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let model = random_model(&mut rng, 8, 2, 5);
        let params = SolveParams { record_trace: true, ..SolveParams::default() };
        let a = solve_mip(&model, &params);
        let b = solve_mip(&model, &params);
        assert_eq!(a.status, b.status);
        assert_eq!(a.values, b.values);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.node_count, b.node_count);
        assert_eq!(a.trace, b.trace);
    }
}

#[test]
fn trace_bounds_never_exceed_incumbent_at_prune() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = random_model(&mut rng, 10, 1, 6);
    let sol = solve_mip(&model, &SolveParams { record_trace: true, ..SolveParams::default() });
    assert_eq!(sol.trace.len(), sol.node_count);
    let f = |v: f64| if model.objective.sense == Sense::Minimize { v } else { -v };
    for ev in &sol.trace {
        // a child's relaxation can never beat its parent's
        if let (Some(lp), Some(parent)) = (ev.lp_bound, ev.parent_bound) {
            assert!(f(lp) >= f(parent) - 1e-7);
        }
    }
}

#[test]
fn larger_lps_agree_with_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..15 {
        let model = random_model(&mut rng, 0, 25, 18);
        let float = solve_lp(&model, &SolveParams::default());
        let exact = solve_lp(&model.convert::<BigRational>(), &SolveParams::default());
        assert_eq!(float.status, exact.status);
        if exact.status == SolveStatus::Optimal {
            assert!(close(float.objective.unwrap(), to_f64(&exact.objective.unwrap()), 1e-7));
        }
    }
}
