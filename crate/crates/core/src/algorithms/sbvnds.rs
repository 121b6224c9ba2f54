use std::collections::BTreeMap;

use super::greedy::{repair_on, solve_singles, union_of, Single};
use super::sbd::{initial_subset, next_scenario};
use super::vns::vns_core;
use super::{finish, AlgoParams, Clock, Finish, Problem, ReportStatus, SolveReport, TraceEvent};
use crate::error::GridError;

/// Scenario-based decomposition where each master is replaced by the
/// greedy union on the current subset followed by neighborhood search.
/// Pricing of outside scenarios stays exact.
pub fn solve_sbvnds(problem: &Problem, params: &AlgoParams) -> Result<SolveReport, GridError> {
    let clock = Clock::new(params.time_limit_seconds);
    let mut subset = initial_subset(problem, params)?;
    let budget = (params.epsilon > 0.0).then(|| problem.budget(params.epsilon));
    let mut singles: BTreeMap<usize, Single> = BTreeMap::new();
    let mut trace = Vec::new();
    let done = |status, design, bound, subset: Vec<usize>, trace| {
        finish(
            problem,
            &clock,
            Finish {
                algorithm: "sbvnds",
                status,
                design,
                bound,
                master_scenarios: subset,
                trace,
            },
        )
    };
    loop {
        let missing: Vec<usize> = subset.iter().copied().filter(|s| !singles.contains_key(s)).collect();
        for s in solve_singles(problem, &missing, params, &clock)? {
            singles.insert(s.scenario, s);
        }
        // a scenario that cannot be served alone can only be excused
        let (usable, unusable): (Vec<&Single>, Vec<&Single>) =
            subset.iter().map(|s| &singles[s]).partition(|s| s.design.is_some());
        if unusable.len() > budget.unwrap_or(0) {
            return done(ReportStatus::Infeasible, None, None, subset, trace);
        }
        let ids: Vec<usize> = usable.iter().map(|s| s.scenario).collect();
        let union = union_of(problem, usable.iter().copied(), &mut trace).expect("usable singles have designs");
        let start = repair_on(problem, &union, &ids, &mut trace)?;
        let out = vns_core(problem, &subset, budget, &start, params, &clock, &mut trace)?;
        if clock.expired() {
            return done(ReportStatus::TimeLimit, Some(out.design), out.lp_bound, subset, trace);
        }
        match next_scenario(problem, &subset, &out.design, budget, clock.remaining())? {
            None => {
                let status = if out.proven { ReportStatus::Optimal } else { ReportStatus::Feasible };
                return done(status, Some(out.design), out.lp_bound, subset, trace);
            }
            Some(p) => {
                trace.push(TraceEvent::ScenarioAdded {
                    scenario: p.scenario,
                    l_value: p.l_value,
                });
                subset.push(p.scenario);
            }
        }
    }
}
