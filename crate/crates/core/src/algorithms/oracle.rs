use gridforge_milp::{MipModel, SolveParams, VarKind};

use super::{price_many, Problem};
use crate::error::GridError;
use crate::formulation::{Design, FirstStage, FirstStageKey};

/// Largest number of free first-stage binaries the oracle will enumerate.
pub const ORACLE_MAX_BINARIES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Minimum investment cost, `None` when no design works.
    pub objective: Option<f64>,
    pub design: Option<Design>,
    /// Binary assignments whose feasibility was actually checked.
    pub evaluated: usize,
}

fn binary_cost(problem: &Problem, keys: &[FirstStageKey], mask: u32) -> f64 {
    let inst = problem.instance;
    keys.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, key)| match *key {
            FirstStageKey::Line(k) => inst.edges[k].build_cost,
            FirstStageKey::Switch(k) => inst.edges[k].switch_cost,
            FirstStageKey::Harden(k) => inst.edges[k].harden_cost,
            FirstStageKey::Facility(i) => inst.buses[i].generation.as_ref().map_or(0.0, |g| g.facility_cost),
            FirstStageKey::Capacity(..) => 0.0,
        })
        .sum()
}

fn design_of(problem: &Problem, keys: &[FirstStageKey], mask: u32) -> Design {
    let mut d = Design::existing(problem.instance);
    for (i, key) in keys.iter().enumerate() {
        if mask >> i & 1 == 0 {
            continue;
        }
        match *key {
            FirstStageKey::Line(k) => d.line_built[k] = true,
            FirstStageKey::Switch(k) => d.switch_built[k] = true,
            FirstStageKey::Harden(k) => d.hardened[k] = true,
            FirstStageKey::Facility(b) => {
                d.facility_built[b] = true;
                if let Some(g) = &problem.instance.buses[b].generation {
                    d.new_capacity[b] = g.max_new_capacity;
                }
            }
            FirstStageKey::Capacity(..) => {}
        }
    }
    d
}

/// Exhaustive search over first-stage binaries, cheapest first.
///
/// Feasibility only grows when components are added, so any assignment
/// contained in a known infeasible one is skipped. Built facilities get
/// their full capacity when capacity is free; otherwise the capacities of
/// each binary assignment are optimised by a master solve with the
/// binaries fixed.
pub fn brute_force_oracle(problem: &Problem, epsilon: f64) -> Result<OracleResult, GridError> {
    let inst = problem.instance;
    let mut scratch = MipModel::new("oracle");
    let (first, _) = FirstStage::declare(&mut scratch, inst);
    let keys: Vec<FirstStageKey> = first
        .variables()
        .into_iter()
        .filter(|(_, v)| scratch.variables[v.0].kind == VarKind::Binary)
        .map(|(k, _)| k)
        .collect();
    if keys.len() > ORACLE_MAX_BINARIES {
        return Err(GridError::TooLarge {
            binaries: keys.len(),
            limit: ORACLE_MAX_BINARIES,
        });
    }
    let budget = problem.budget(epsilon);
    let all: Vec<usize> = (0..problem.scenarios.len()).collect();
    let line_bit = |k: usize| keys.iter().position(|&x| x == FirstStageKey::Line(k));

    let mut masks: Vec<(f64, u32)> = (0..1u32 << keys.len())
        .filter(|&mask| {
            // a switch on an unbuilt candidate line is never useful
            keys.iter().enumerate().all(|(i, key)| match *key {
                FirstStageKey::Switch(k) if mask >> i & 1 == 1 => line_bit(k).is_none_or(|b| mask >> b & 1 == 1),
                _ => true,
            })
        })
        .map(|mask| (binary_cost(problem, &keys, mask), mask))
        .collect();
    masks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut infeasible: Vec<u32> = Vec::new();
    let mut best: Option<(f64, Design)> = None;
    let mut evaluated = 0;
    for (cost, mask) in masks {
        if best.as_ref().is_some_and(|(b, _)| cost >= *b - 1e-9) {
            break;
        }
        if infeasible.iter().any(|&bad| mask & !bad == 0) {
            continue;
        }
        evaluated += 1;
        let full = design_of(problem, &keys, mask);
        let priced_capacity = full.facility_built.iter().enumerate().any(|(b, &built)| {
            built
                && inst.buses[b]
                    .generation
                    .as_ref()
                    .is_some_and(|g| (0..3).any(|p| g.max_new_capacity[p] > 0.0 && g.capacity_cost[p] > 0.0))
        });
        let candidate = if priced_capacity {
            let chance = (epsilon > 0.0).then_some(budget);
            let master = problem.master(&all, chance)?;
            let fixes: Vec<_> = master
                .first
                .variables()
                .into_iter()
                .filter(|(k, _)| !matches!(k, FirstStageKey::Capacity(..)))
                .map(|(k, v)| (v, FirstStage::design_value(&full, k)))
                .collect();
            let fixed = master.model.fix_assignment(&fixes)?;
            let sol = gridforge_milp::solve_mip(
                &fixed,
                &SolveParams {
                    mip_gap: 1e-9,
                    time_limit_seconds: f64::INFINITY,
                    ..SolveParams::default()
                },
            );
            sol.has_solution().then(|| master.design(&sol.values))
        } else {
            let results = price_many(problem, &full, &all, f64::INFINITY)?;
            let violated = results.iter().filter(|r| !r.is_feasible()).count();
            (violated <= budget).then_some(full)
        };
        match candidate {
            Some(d) => {
                let c = d.cost(inst);
                if best.as_ref().is_none_or(|(b, _)| c < *b - 1e-9) {
                    best = Some((c, d));
                }
            }
            None => infeasible.push(mask),
        }
    }
    Ok(OracleResult {
        objective: best.as_ref().map(|(c, _)| *c),
        design: best.map(|(_, d)| d),
        evaluated,
    })
}
