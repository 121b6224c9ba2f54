use gridforge_milp::{solve_mip, MipModel, Sense, SolveParams, SolveStatus};
use serde::{Deserialize, Serialize};

use super::{build_scenario_block, Design, FirstStage, ScenarioOperation, ScenarioVars, ServiceMode};
use crate::cycles::CycleSet;
use crate::error::GridError;
use crate::grid::NetworkInstance;
use crate::scenario::Scenario;

/// Shortfalls below this count as zero.
pub const SHORTFALL_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct PricingModel {
    pub model: MipModel,
    pub vars: ScenarioVars,
}

/// How far a fixed design falls short of the service targets in one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub scenario: usize,
    /// Zero exactly when the scenario meets both targets.
    pub l_value: f64,
    pub served_critical_fraction: f64,
    /// Served fraction of the non-critical load.
    pub served_total_fraction: f64,
    pub operation: ScenarioOperation,
}

impl PricingResult {
    pub fn is_feasible(&self) -> bool {
        self.l_value == 0.0
    }
}

/// The operating problem of one scenario under a fixed design, with the
/// service rows softened and the total shortfall minimised.
pub fn build_pricing_model(
    instance: &NetworkInstance,
    scenario: &Scenario,
    design: &Design,
    cycles: &CycleSet,
) -> Result<PricingModel, GridError> {
    design.validate(instance)?;
    let mut model = MipModel::new(format!("pricing_s{}", scenario.id));
    let first = FirstStage::fixed(design);
    let vars = build_scenario_block(&mut model, instance, scenario, cycles, &first, ServiceMode::Shortfall);
    let objective = vars.shortfall.iter().flatten().map(|v| (*v, 1.0)).collect();
    model.set_objective(Sense::Minimize, objective);
    Ok(PricingModel { model, vars })
}

/// Served critical and non-critical fractions of an operation, computed
/// from the served blocks. Zero demand counts as fully served.
pub(crate) fn served_fractions(instance: &NetworkInstance, op: &ScenarioOperation) -> (f64, f64) {
    let mut served = [0.0, 0.0];
    let mut demand = [0.0, 0.0];
    for (i, b) in instance.buses.iter().enumerate() {
        let slot = usize::from(!b.is_critical);
        for (j, block) in b.load_blocks.iter().enumerate() {
            demand[slot] += block.total();
            if op.block_served[i][j] {
                served[slot] += block.total();
            }
        }
    }
    let frac = |k: usize| if demand[k] > 0.0 { served[k] / demand[k] } else { 1.0 };
    (frac(0), frac(1))
}

pub(crate) fn shortfall(instance: &NetworkInstance, critical: f64, total: f64) -> f64 {
    let l = (instance.critical_fraction - critical).max(0.0) + (instance.total_fraction - total).max(0.0);
    if l < SHORTFALL_TOL {
        0.0
    } else {
        l
    }
}

/// Solves the pricing problem and reports the infeasibility measure.
pub fn price_scenario(
    instance: &NetworkInstance,
    scenario: &Scenario,
    design: &Design,
    cycles: &CycleSet,
    params: &SolveParams,
) -> Result<PricingResult, GridError> {
    let pm = build_pricing_model(instance, scenario, design, cycles)?;
    let sol = solve_mip(&pm.model, params);
    if !sol.has_solution() {
        return Err(GridError::Solver(format!(
            "pricing scenario {} ended with {:?}",
            scenario.id, sol.status
        )));
    }
    if sol.status != SolveStatus::Optimal && sol.status != SolveStatus::TimeLimit {
        return Err(GridError::Solver(format!(
            "pricing scenario {} ended with {:?}",
            scenario.id, sol.status
        )));
    }
    let operation = pm.vars.operation(&sol.values);
    let (c, t) = served_fractions(instance, &operation);
    Ok(PricingResult {
        scenario: scenario.id,
        l_value: shortfall(instance, c, t),
        served_critical_fraction: c,
        served_total_fraction: t,
        operation,
    })
}
