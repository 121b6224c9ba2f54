use gridforge_milp::SolveStatus;

use super::{finish, mip_params, solve_master, status_name, AlgoParams, Clock, Finish, Problem, ReportStatus, SolveReport, TraceEvent};
use crate::error::GridError;

pub(crate) fn report_status(status: SolveStatus) -> ReportStatus {
    match status {
        SolveStatus::Optimal => ReportStatus::Optimal,
        SolveStatus::Infeasible | SolveStatus::Unbounded => ReportStatus::Infeasible,
        SolveStatus::TimeLimit | SolveStatus::NodeLimit => ReportStatus::TimeLimit,
        SolveStatus::NumericalFailure => ReportStatus::Feasible,
    }
}

/// Solves the master over every scenario at once.
pub fn solve_extensive(problem: &Problem, params: &AlgoParams) -> Result<SolveReport, GridError> {
    let clock = Clock::new(params.time_limit_seconds);
    let ids: Vec<usize> = (0..problem.scenarios.len()).collect();
    let budget = (params.epsilon > 0.0).then(|| problem.budget(params.epsilon));
    let run = solve_master(problem, &ids, budget, &mip_params(params, clock.remaining()))?;
    let trace = vec![TraceEvent::MasterSolved {
        scenarios: ids.clone(),
        objective: run.solution.objective,
        status: status_name(run.solution.status),
    }];
    finish(
        problem,
        &clock,
        Finish {
            algorithm: "extensive",
            status: report_status(run.solution.status),
            design: run.design(),
            bound: run.solution.bound,
            master_scenarios: ids,
            trace,
        },
    )
}
