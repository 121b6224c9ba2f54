use gridforge_milp::{MipModel, Relation, Sense, VarId};

use super::{build_scenario_block, Design, FirstStage, ScenarioOperation, ScenarioVars, ServiceMode, Slot};
use crate::cycles::CycleSet;
use crate::error::GridError;
use crate::grid::{validate_instance, NetworkInstance, Phase};
use crate::scenario::Scenario;

/// The two-stage design problem over a set of scenarios.
#[derive(Clone, Debug)]
pub struct MasterModel {
    pub model: MipModel,
    pub first: FirstStage,
    /// One block per scenario, in the order given to [`build_master`].
    pub blocks: Vec<ScenarioVars>,
    /// Scenario excuse variables, aligned with `blocks`; empty unless relaxed.
    pub chance: Vec<VarId>,
}

impl MasterModel {
    pub fn design(&self, values: &[f64]) -> Design {
        self.first.design(values)
    }

    pub fn operations(&self, values: &[f64]) -> Vec<ScenarioOperation> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, vars)| {
                let mut op = vars.operation(values);
                op.chance_violated = self.chance.get(b).is_some_and(|z| values[z.0] > 0.5);
                op
            })
            .collect()
    }

    /// Scenario ids whose requirements the solution excuses.
    pub fn excused(&self, values: &[f64]) -> Vec<usize> {
        self.chance
            .iter()
            .zip(&self.blocks)
            .filter(|(z, _)| values[z.0] > 0.5)
            .map(|(_, b)| b.scenario)
            .collect()
    }
}

/// Builds the design problem: investment cost objective, the capacity cap,
/// and one linked operating block per scenario.
pub fn build_master(instance: &NetworkInstance, scenarios: &[Scenario], cycles: &CycleSet) -> Result<MasterModel, GridError> {
    let report = validate_instance(instance);
    if !report.is_empty() {
        return Err(GridError::InvalidInstance(report));
    }
    let mut model = MipModel::new(if instance.name.is_empty() { "design" } else { &instance.name });
    let (first, cost) = FirstStage::declare(&mut model, instance);
    for (_, v) in first.variables() {
        if model.variables[v.0].kind == gridforge_milp::VarKind::Binary {
            model.set_branch_priority(v, 1);
        }
    }
    model.set_objective(Sense::Minimize, cost);

    for (i, b) in instance.buses.iter().enumerate() {
        let (Slot::Var(f), Some(g)) = (first.facility[i], b.generation.as_ref()) else {
            continue;
        };
        for p in Phase::ALL {
            if let Slot::Var(c) = first.capacity[i][p.index()] {
                let max = g.max_new_capacity[p.index()];
                model.add_constraint(
                    format!("capacity_cap.{}.{p}", b.id),
                    vec![(c, 1.0), (f, -max)],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }

    let blocks = scenarios
        .iter()
        .map(|s| build_scenario_block(&mut model, instance, s, cycles, &first, ServiceMode::Required))
        .collect();
    Ok(MasterModel {
        model,
        first,
        blocks,
        chance: Vec::new(),
    })
}

/// Number of scenarios that may be excused: `floor(epsilon * count)`.
pub fn chance_budget(epsilon: f64, count: usize) -> usize {
    (epsilon * count as f64 + 1e-9).floor().max(0.0) as usize
}

/// Lets each scenario's service rows be switched off by a binary, with at
/// most `budget` scenarios switched off.
pub fn apply_chance_relaxation(master: &mut MasterModel, budget: usize) {
    let mut chance = Vec::with_capacity(master.blocks.len());
    for block in &master.blocks {
        let z = master.model.add_binary(format!("chance.s{}", block.scenario));
        for row in [block.critical_row, block.total_row].into_iter().flatten() {
            let c = &mut master.model.constraints[row.0];
            c.terms.push((z, c.rhs));
        }
        chance.push(z);
    }
    master.model.add_constraint(
        "chance_budget",
        chance.iter().map(|z| (*z, 1.0)).collect(),
        Relation::Le,
        budget as f64,
    );
    master.chance = chance;
}
