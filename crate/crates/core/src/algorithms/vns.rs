use std::collections::HashSet;

use gridforge_milp::{solve_lp, solve_mip, SolveParams, SolveStatus, VarKind};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{finish, AlgoParams, Clock, Finish, Problem, ReportStatus, SolveReport, TraceEvent};
use crate::error::GridError;
use crate::formulation::{Design, FirstStage, FirstStageKey};

/// Distances below this count as agreement with the LP relaxation.
const DIVERGENCE_TOL: f64 = 1e-6;

pub(crate) struct VnsOutcome {
    pub design: Design,
    /// The incumbent matched the LP bound.
    pub proven: bool,
    pub lp_bound: Option<f64>,
}

fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - 1e-9 * incumbent.abs().max(1.0)
}

/// Neighborhood search around `initial` on the master over `ids`.
///
/// First-stage variables are ordered by how far the incumbent sits from
/// the LP relaxation; the closest ones are fixed to the incumbent and the
/// rest re-optimised. Failed attempts free more variables; after
/// `max_iterations` failures the search restarts from a wider, shuffled
/// neighborhood. Any improvement resets the restart counter.
pub(crate) fn vns_core(
    problem: &Problem,
    ids: &[usize],
    budget: Option<usize>,
    initial: &Design,
    params: &AlgoParams,
    clock: &Clock,
    trace: &mut Vec<TraceEvent>,
) -> Result<VnsOutcome, GridError> {
    let vp = &params.vns;
    let local = Clock::new(clock.remaining().min(vp.max_time_seconds));
    let slice = vp.max_time_seconds / (vp.max_restarts.max(1) * vp.max_iterations.max(1)) as f64;
    let master = problem.master(ids, budget)?;
    let xs = master.first.variables();
    let size = xs.len();
    let norm: Vec<f64> = xs
        .iter()
        .map(|(key, v)| match key {
            FirstStageKey::Capacity(..) => master.model.variables[v.0].upper.unwrap_or(1.0).max(1.0),
            _ => 1.0,
        })
        .collect();

    let lp = solve_lp(
        &master.model,
        &SolveParams {
            time_limit_seconds: local.remaining(),
            ..SolveParams::default()
        },
    );
    let lp_bound = lp.has_solution().then_some(lp.objective).flatten();
    let lp_values: Option<Vec<f64>> = lp.has_solution().then(|| xs.iter().map(|(_, v)| lp.values[v.0]).collect());

    let mut incumbent = initial.clone();
    let mut best = incumbent.cost(problem.instance);
    let at_bound = |f: f64| vp.stop_at_lp_bound && lp_bound.is_some_and(|b| !improves(b, f));

    let value_of = |d: &Design, idx: usize| -> f64 {
        let (key, v) = xs[idx];
        let var = &master.model.variables[v.0];
        let x = FirstStage::design_value(d, key);
        let x = if var.kind == VarKind::Binary { x.round() } else { x };
        x.clamp(var.lower.unwrap_or(f64::NEG_INFINITY), var.upper.unwrap_or(f64::INFINITY))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(vp.shuffle_seed);
    let mut failed: HashSet<Vec<usize>> = HashSet::new();
    let mut restarts = 0;
    let mut restart = false;
    let mut proven = at_bound(best);
    let d = vp.d.max(1);

    'outer: while !proven && !local.expired() && restarts < vp.max_restarts {
        let dist: Vec<f64> = (0..size)
            .map(|i| match &lp_values {
                Some(lv) => (value_of(&incumbent, i) - lv[i]).abs() / norm[i],
                None => 0.0,
            })
            .collect();
        let divergent = dist.iter().filter(|&&x| x > DIVERGENCE_TOL).count();
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        if let Some(objective) = lp_bound {
            trace.push(TraceEvent::LpRelaxation { objective, divergent });
        }
        let step = if restart {
            restarts += 1;
            order.shuffle(&mut rng);
            4 * divergent / d
        } else {
            divergent / d
        };
        let mut k = size as isize - step as isize;
        let mut j = 0;
        while !local.expired() && j <= vp.max_iterations {
            let fixed_count = k.clamp(0, size as isize) as usize;
            let mut fixed: Vec<usize> = order[..fixed_count].to_vec();
            fixed.sort_unstable();
            let mut improved = None;
            if fixed_count < size && !failed.contains(&fixed) {
                let fixes: Vec<_> = fixed.iter().map(|&i| (xs[i].1, value_of(&incumbent, i))).collect();
                let model = master.model.fix_assignment(&fixes)?;
                let sp = SolveParams {
                    time_limit_seconds: slice.min(local.remaining()),
                    mip_gap: params.mip_gap,
                    cutoff: Some(best),
                    ..SolveParams::default()
                };
                let sol = solve_mip(&model, &sp);
                // nothing fixed and the search finished: the result is exact
                let complete =
                    fixed_count == 0 && matches!(sol.status, SolveStatus::Optimal | SolveStatus::Infeasible);
                let candidate = sol.has_solution().then(|| master.design(&sol.values));
                let cost = candidate.as_ref().map(|c| c.cost(problem.instance));
                let accepted = cost.is_some_and(|c| improves(c, best));
                trace.push(TraceEvent::Neighborhood {
                    restart: restarts,
                    iteration: j,
                    fixed: fixed_count,
                    free: size - fixed_count,
                    objective: cost,
                    accepted,
                });
                if accepted {
                    improved = candidate.zip(cost);
                } else {
                    failed.insert(fixed);
                }
                if complete {
                    if let Some((c, _)) = improved {
                        incumbent = c;
                    }
                    proven = true;
                    break 'outer;
                }
            }
            match improved {
                Some((c, f)) => {
                    incumbent = c;
                    best = f;
                    failed.clear();
                    restarts = 0;
                    restart = false;
                    j = vp.max_iterations;
                    if at_bound(best) {
                        proven = true;
                        break 'outer;
                    }
                }
                None => {
                    j += 1;
                    k -= (step / 2) as isize;
                    if j > vp.max_iterations {
                        restart = true;
                    }
                }
            }
        }
    }
    Ok(VnsOutcome {
        design: incumbent,
        proven,
        lp_bound,
    })
}

/// Improves `initial` by neighborhood search over all scenarios.
pub fn solve_vns(problem: &Problem, initial: &Design, params: &AlgoParams) -> Result<SolveReport, GridError> {
    let clock = Clock::new(params.time_limit_seconds);
    let ids: Vec<usize> = (0..problem.scenarios.len()).collect();
    let budget = (params.epsilon > 0.0).then(|| problem.budget(params.epsilon));
    let mut trace = Vec::new();
    let out = vns_core(problem, &ids, budget, initial, params, &clock, &mut trace)?;
    finish(
        problem,
        &clock,
        Finish {
            algorithm: "vns",
            status: if out.proven { ReportStatus::Optimal } else { ReportStatus::Feasible },
            design: Some(out.design),
            bound: out.lp_bound,
            master_scenarios: ids,
            trace,
        },
    )
}
