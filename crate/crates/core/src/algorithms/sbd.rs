use super::extensive::report_status;
use super::{
    finish, mip_params, price_many, solve_master, status_name, worst, AlgoParams, Clock, Finish, Problem, ReportStatus,
    SolveReport, TraceEvent,
};
use crate::error::GridError;
use crate::formulation::PricingResult;

/// Checks and de-duplicates the starting scenario list, keeping its order.
pub(crate) fn initial_subset(problem: &Problem, params: &AlgoParams) -> Result<Vec<usize>, GridError> {
    let mut out: Vec<usize> = Vec::new();
    for &s in &params.initial_scenarios {
        if s >= problem.scenarios.len() {
            return Err(GridError::UnknownId {
                kind: "scenario",
                id: s.to_string(),
            });
        }
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Prices a design found for `subset` and decides whether it solves the
/// whole problem. Returns `None` when it does, else the scenario to add.
///
/// Without a chance budget only scenarios outside the subset can fail.
/// With one, every scenario is priced and the design passes when at most
/// `budget` scenarios miss their targets.
pub(crate) fn next_scenario(
    problem: &Problem,
    subset: &[usize],
    design: &crate::formulation::Design,
    budget: Option<usize>,
    time: f64,
) -> Result<Option<PricingResult>, GridError> {
    let ids: Vec<usize> = match budget {
        None => (0..problem.scenarios.len()).filter(|s| !subset.contains(s)).collect(),
        Some(_) => (0..problem.scenarios.len()).collect(),
    };
    let results = price_many(problem, design, &ids, time)?;
    let violated = results.iter().filter(|r| !r.is_feasible()).count();
    if violated <= budget.unwrap_or(0) {
        return Ok(None);
    }
    let outside: Vec<PricingResult> = results.into_iter().filter(|r| !subset.contains(&r.scenario)).collect();
    match worst(&outside) {
        Some(p) => Ok(Some(p.clone())),
        None => Err(GridError::Solver(format!(
            "{violated} scenarios violated inside the subset, above the budget"
        ))),
    }
}

/// Scenario-based decomposition: solve the master on a growing subset of
/// scenarios, adding the worst-served outside scenario until the design
/// holds everywhere.
pub fn solve_sbd(problem: &Problem, params: &AlgoParams) -> Result<SolveReport, GridError> {
    let clock = Clock::new(params.time_limit_seconds);
    let mut subset = initial_subset(problem, params)?;
    let budget = (params.epsilon > 0.0).then(|| problem.budget(params.epsilon));
    let mut trace = Vec::new();
    loop {
        let run = solve_master(problem, &subset, budget, &mip_params(params, clock.remaining()))?;
        trace.push(TraceEvent::MasterSolved {
            scenarios: subset.clone(),
            objective: run.solution.objective,
            status: status_name(run.solution.status),
        });
        let status = report_status(run.solution.status);
        let design = run.design();
        let stop = |status, design, trace| {
            finish(
                problem,
                &clock,
                Finish {
                    algorithm: "sbd",
                    status,
                    design,
                    bound: run.solution.bound,
                    master_scenarios: subset.clone(),
                    trace,
                },
            )
        };
        let d = match design {
            Some(d) if status == ReportStatus::Optimal => d,
            other => return stop(status, other, trace),
        };
        if clock.expired() {
            return stop(ReportStatus::TimeLimit, Some(d), trace);
        }
        match next_scenario(problem, &subset, &d, budget, clock.remaining())? {
            None => return stop(ReportStatus::Optimal, Some(d), trace),
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
