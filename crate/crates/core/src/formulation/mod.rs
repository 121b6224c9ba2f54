//! MILP encodings: per-scenario operation blocks, the two-stage master
//! problem, the chance-constrained variant and the scenario pricing model.
//!
//! Variable and constraint names are deterministic and prefixed by the
//! scenario index (`s3.flow.e7.B`), so exported models diff cleanly.

mod block;
mod design;
mod master;
mod pricing;

use gridforge_milp::{MipModel, VarId};
use serde::{Deserialize, Serialize};

use crate::grid::{NetworkInstance, PerPhase, Phase};

pub use block::{build_scenario_block, ServiceMode};
pub use design::{Design, CAPACITY_EPS};
pub use master::{apply_chance_relaxation, build_master, chance_budget, MasterModel};
pub use pricing::{build_pricing_model, price_scenario, PricingModel, PricingResult, SHORTFALL_TOL};

/// A first-stage quantity inside a model: either a decision variable or a
/// known constant (existing equipment, or a design under evaluation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Const(f64),
    Var(VarId),
}

/// Identifies one first-stage decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FirstStageKey {
    Line(usize),
    Switch(usize),
    Harden(usize),
    Facility(usize),
    Capacity(usize, Phase),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstStage {
    pub line: Vec<Slot>,
    pub switch: Vec<Slot>,
    pub harden: Vec<Slot>,
    pub facility: Vec<Slot>,
    pub capacity: Vec<[Slot; 3]>,
}

impl FirstStage {
    /// Declares the first-stage variables in `model` and returns them with
    /// their cost terms. Existing components become constants.
    pub fn declare(model: &mut MipModel, instance: &NetworkInstance) -> (Self, Vec<(VarId, f64)>) {
        let mut cost = Vec::new();
        let mut line = Vec::new();
        let mut switch = Vec::new();
        let mut harden = Vec::new();
        for e in &instance.edges {
            line.push(if e.exists {
                Slot::Const(1.0)
            } else {
                let v = model.add_binary(format!("build.{}", e.id));
                cost.push((v, e.build_cost));
                Slot::Var(v)
            });
            switch.push(if e.has_existing_switch {
                Slot::Const(1.0)
            } else {
                let v = model.add_binary(format!("switch.{}", e.id));
                cost.push((v, e.switch_cost));
                Slot::Var(v)
            });
            harden.push(if e.hardenable {
                let v = model.add_binary(format!("harden.{}", e.id));
                cost.push((v, e.harden_cost));
                Slot::Var(v)
            } else {
                Slot::Const(0.0)
            });
        }
        let mut facility = Vec::new();
        let mut capacity = Vec::new();
        for b in &instance.buses {
            let mut caps = [Slot::Const(0.0); 3];
            match b.generation.as_ref().filter(|g| g.can_expand()) {
                Some(g) => {
                    let f = model.add_binary(format!("facility.{}", b.id));
                    cost.push((f, g.facility_cost));
                    facility.push(Slot::Var(f));
                    for p in Phase::ALL {
                        let max = g.max_new_capacity[p.index()];
                        if max > 0.0 {
                            let c = model.add_continuous(format!("capacity.{}.{p}", b.id), Some(0.0), Some(max));
                            cost.push((c, g.capacity_cost[p.index()]));
                            caps[p.index()] = Slot::Var(c);
                        }
                    }
                }
                None => facility.push(Slot::Const(0.0)),
            }
            capacity.push(caps);
        }
        cost.retain(|(_, c)| *c != 0.0);
        (
            Self {
                line,
                switch,
                harden,
                facility,
                capacity,
            },
            cost,
        )
    }

    /// All first-stage quantities fixed to a design.
    pub fn fixed(design: &Design) -> Self {
        let b = |x: bool| Slot::Const(if x { 1.0 } else { 0.0 });
        Self {
            line: design.line_built.iter().map(|&x| b(x)).collect(),
            switch: design.switch_built.iter().map(|&x| b(x)).collect(),
            harden: design.hardened.iter().map(|&x| b(x)).collect(),
            facility: design.facility_built.iter().map(|&x| b(x)).collect(),
            capacity: design
                .new_capacity
                .iter()
                .map(|c| [Slot::Const(c[0]), Slot::Const(c[1]), Slot::Const(c[2])])
                .collect(),
        }
    }

    /// The decision variables, in declaration order.
    pub fn variables(&self) -> Vec<(FirstStageKey, VarId)> {
        let mut out: Vec<(FirstStageKey, VarId)> = Vec::new();
        let mut push = |key, slot: &Slot| {
            if let Slot::Var(v) = slot {
                out.push((key, *v));
            }
        };
        for k in 0..self.line.len() {
            push(FirstStageKey::Line(k), &self.line[k]);
            push(FirstStageKey::Switch(k), &self.switch[k]);
            push(FirstStageKey::Harden(k), &self.harden[k]);
        }
        for i in 0..self.facility.len() {
            push(FirstStageKey::Facility(i), &self.facility[i]);
            for p in Phase::ALL {
                push(FirstStageKey::Capacity(i, p), &self.capacity[i][p.index()]);
            }
        }
        out.sort_by_key(|(_, v)| v.0);
        out
    }

    /// Reads a design back from solver values (binaries rounded, tiny
    /// capacities cleared, switches on unbuilt lines dropped).
    pub fn design(&self, values: &[f64]) -> Design {
        let read = |s: &Slot| match s {
            Slot::Const(c) => *c,
            Slot::Var(v) => values[v.0],
        };
        let bin = |s: &Slot| read(s) > 0.5;
        let line_built: Vec<bool> = self.line.iter().map(bin).collect();
        let switch_built = self
            .switch
            .iter()
            .zip(&line_built)
            .map(|(s, &l)| bin(s) && l)
            .collect();
        let facility_built: Vec<bool> = self.facility.iter().map(bin).collect();
        let new_capacity = self
            .capacity
            .iter()
            .zip(&facility_built)
            .map(|(caps, &f)| {
                let mut out = [0.0; 3];
                if f {
                    for (o, s) in out.iter_mut().zip(caps) {
                        let v = read(s);
                        *o = if v > CAPACITY_EPS { v } else { 0.0 };
                    }
                }
                out
            })
            .collect();
        Design {
            line_built,
            switch_built,
            hardened: self.harden.iter().map(bin).collect(),
            facility_built,
            new_capacity,
        }
    }

    /// The value a design assigns to a first-stage decision.
    pub fn design_value(design: &Design, key: FirstStageKey) -> f64 {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        match key {
            FirstStageKey::Line(k) => b(design.line_built[k]),
            FirstStageKey::Switch(k) => b(design.switch_built[k]),
            FirstStageKey::Harden(k) => b(design.hardened[k]),
            FirstStageKey::Facility(i) => b(design.facility_built[i]),
            FirstStageKey::Capacity(i, p) => design.new_capacity[i][p.index()],
        }
    }
}

/// Variables of one scenario block. `None` marks quantities that do not
/// exist for that element (e.g. no flow on a phase the edge lacks).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioVars {
    pub scenario: usize,
    pub line_used: Vec<VarId>,
    pub switch_open: Vec<VarId>,
    /// Only damaged edges carry a hardening-use variable.
    pub harden_used: Vec<Option<VarId>>,
    pub facility_used: Vec<Option<VarId>>,
    pub capacity_use: Vec<[Option<VarId>; 3]>,
    pub direction_neg: Vec<VarId>,
    pub direction_pos: Vec<VarId>,
    pub flow: Vec<[Option<VarId>; 3]>,
    pub generation: Vec<[Option<VarId>; 3]>,
    pub served: Vec<[Option<VarId>; 3]>,
    pub block_served: Vec<Vec<VarId>>,
    /// Per reduced edge; only edges on some cycle.
    pub cycle_line: Vec<Option<VarId>>,
    pub cycle_switch: Vec<Option<VarId>>,
    pub critical_row: Option<gridforge_milp::ConstraintId>,
    pub total_row: Option<gridforge_milp::ConstraintId>,
    /// Pricing only: critical and non-critical shortfall fractions.
    pub shortfall: [Option<VarId>; 2],
}

/// Second-stage decisions of one scenario, read from a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOperation {
    pub scenario: usize,
    pub line_used: Vec<bool>,
    pub switch_open: Vec<bool>,
    pub harden_used: Vec<bool>,
    pub facility_used: Vec<bool>,
    pub capacity_use: Vec<PerPhase>,
    pub direction_neg: Vec<bool>,
    pub direction_pos: Vec<bool>,
    pub flow: Vec<PerPhase>,
    pub generation: Vec<PerPhase>,
    pub served_load: Vec<PerPhase>,
    pub block_served: Vec<Vec<bool>>,
    pub cycle_line: Vec<bool>,
    pub cycle_switch: Vec<bool>,
    pub chance_violated: bool,
}

impl ScenarioVars {
    pub fn operation(&self, values: &[f64]) -> ScenarioOperation {
        let bin = |v: &VarId| values[v.0] > 0.5;
        let obin = |v: &Option<VarId>| v.is_some_and(|v| values[v.0] > 0.5);
        let real = |v: &Option<VarId>| v.map_or(0.0, |v| clean(values[v.0]));
        let per_phase = |vs: &Vec<[Option<VarId>; 3]>| -> Vec<PerPhase> {
            vs.iter().map(|a| [real(&a[0]), real(&a[1]), real(&a[2])]).collect()
        };
        ScenarioOperation {
            scenario: self.scenario,
            line_used: self.line_used.iter().map(bin).collect(),
            switch_open: self.switch_open.iter().map(bin).collect(),
            harden_used: self.harden_used.iter().map(obin).collect(),
            facility_used: self.facility_used.iter().map(obin).collect(),
            capacity_use: per_phase(&self.capacity_use),
            direction_neg: self.direction_neg.iter().map(bin).collect(),
            direction_pos: self.direction_pos.iter().map(bin).collect(),
            flow: per_phase(&self.flow),
            generation: per_phase(&self.generation),
            served_load: per_phase(&self.served),
            block_served: self.block_served.iter().map(|bs| bs.iter().map(bin).collect()).collect(),
            cycle_line: self.cycle_line.iter().map(obin).collect(),
            cycle_switch: self.cycle_switch.iter().map(obin).collect(),
            chance_violated: false,
        }
    }
}

/// Rounds solver noise (and negative zero) to zero.
fn clean(v: f64) -> f64 {
    if v.abs() < 1e-9 {
        0.0
    } else {
        v
    }
}
