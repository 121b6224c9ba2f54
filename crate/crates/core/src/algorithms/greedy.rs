use gridforge_milp::{solve_mip, MipModel, Sense, SolveStatus};
use rayon::prelude::*;

use super::{finish, mip_params, solve_master, AlgoParams, Clock, Finish, Problem, ReportStatus, SolveReport, TraceEvent};
use crate::error::GridError;
use crate::formulation::{build_scenario_block, Design, FirstStage, ServiceMode, Slot};

/// Optimal design of one scenario on its own.
pub(crate) struct Single {
    pub scenario: usize,
    pub status: SolveStatus,
    pub design: Option<Design>,
}

pub(crate) fn solve_singles(
    problem: &Problem,
    ids: &[usize],
    params: &AlgoParams,
    clock: &Clock,
) -> Result<Vec<Single>, GridError> {
    ids.par_iter()
        .map(|&s| {
            let run = solve_master(problem, &[s], None, &mip_params(params, clock.remaining()))?;
            Ok(Single {
                scenario: s,
                status: run.solution.status,
                design: run.design(),
            })
        })
        .collect()
}

/// Unions single-scenario designs. `None` when some scenario has no design.
pub(crate) fn union_of<'a>(
    problem: &Problem,
    singles: impl IntoIterator<Item = &'a Single>,
    trace: &mut Vec<TraceEvent>,
) -> Option<Design> {
    let mut acc = Design::existing(problem.instance);
    for s in singles {
        let d = s.design.as_ref()?;
        trace.push(TraceEvent::SingleScenario {
            scenario: s.scenario,
            objective: d.cost(problem.instance),
        });
        acc = acc.union(d);
    }
    Some(acc)
}

/// Solves each scenario alone, takes the union of the designs and adds the
/// switches the union needs to stay radial. Ignores the chance budget.
pub fn solve_greedy(problem: &Problem, params: &AlgoParams) -> Result<SolveReport, GridError> {
    let clock = Clock::new(params.time_limit_seconds);
    let ids: Vec<usize> = (0..problem.scenarios.len()).collect();
    let singles = solve_singles(problem, &ids, params, &clock)?;
    let mut trace = Vec::new();
    let timed_out = singles.iter().any(|s| matches!(s.status, SolveStatus::TimeLimit | SolveStatus::NodeLimit));
    let (status, design) = match union_of(problem, &singles, &mut trace) {
        None if timed_out => (ReportStatus::TimeLimit, None),
        None => (ReportStatus::Infeasible, None),
        Some(u) => {
            let repaired = repair_on(problem, &u, &ids, &mut trace)?;
            let status = if timed_out { ReportStatus::TimeLimit } else { ReportStatus::Feasible };
            (status, Some(repaired))
        }
    };
    finish(
        problem,
        &clock,
        Finish {
            algorithm: "greedy",
            status,
            design,
            bound: None,
            master_scenarios: Vec::new(),
            trace,
        },
    )
}

/// Adds the cheapest switches that let every scenario operate radially
/// with all surviving built lines energized. Ties go to lower edge indices.
pub fn repair_switches(problem: &Problem, design: &Design) -> Result<Design, GridError> {
    let ids: Vec<usize> = (0..problem.scenarios.len()).collect();
    repair_on(problem, design, &ids, &mut Vec::new())
}

pub(crate) fn repair_on(
    problem: &Problem,
    design: &Design,
    ids: &[usize],
    trace: &mut Vec<TraceEvent>,
) -> Result<Design, GridError> {
    let inst = problem.instance;
    design.validate(inst)?;
    let mut out = design.clone();
    let m = inst.edges.len();
    // below any real cost difference, ordered by edge index
    let tie = |k: usize| 1e-6 * (k + 1) as f64 / (m + 1) as f64;
    for &s in ids {
        let scenario = problem.scenario(s);
        let mut model = MipModel::new(format!("repair_s{s}"));
        let mut first = FirstStage::fixed(&out);
        let mut objective = Vec::new();
        for (k, e) in inst.edges.iter().enumerate() {
            if out.line_built[k] && !out.switch_built[k] {
                let v = model.add_binary(format!("switch.{}", e.id));
                objective.push((v, e.switch_cost + tie(k)));
                first.switch[k] = Slot::Var(v);
            }
        }
        let vars = build_scenario_block(&mut model, inst, scenario, &problem.cycles, &first, ServiceMode::Required);
        for k in 0..m {
            let survives = !scenario.is_damaged(k) || (out.hardened[k] && !scenario.is_hardened_damaged(k));
            if out.line_built[k] && survives {
                model.variables[vars.line_used[k].0].lower = Some(1.0);
            }
        }
        model.set_objective(Sense::Minimize, objective);
        let params = gridforge_milp::SolveParams {
            mip_gap: 0.0,
            ..Default::default()
        };
        let sol = solve_mip(&model, &params);
        if !sol.has_solution() {
            return Err(GridError::Solver(format!(
                "switch repair for scenario {s} ended with {:?}",
                sol.status
            )));
        }
        let mut added = Vec::new();
        for (k, e) in inst.edges.iter().enumerate() {
            if let Slot::Var(v) = first.switch[k] {
                if sol.values[v.0] > 0.5 {
                    out.switch_built[k] = true;
                    added.push(e.id.clone());
                }
            }
        }
        if !added.is_empty() {
            trace.push(TraceEvent::SwitchesAdded { scenario: s, edges: added });
        }
    }
    Ok(out)
}
