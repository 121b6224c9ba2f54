use gridforge_milp::{MipModel, Relation, VarId};

use super::{FirstStage, ScenarioVars, Slot};
use crate::cycles::CycleSet;
use crate::grid::{NetworkInstance, Phase};
use crate::scenario::Scenario;

/// How the two service requirements enter a scenario block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServiceMode {
    /// Hard rows: served critical and non-critical fractions meet the targets.
    Required,
    /// Rows relaxed by nonnegative shortfall variables (pricing).
    Shortfall,
}

/// Caps `var` by a first-stage slot: a row for variables, a bound for constants.
fn link(model: &mut MipModel, name: String, var: VarId, slot: Slot) {
    match slot {
        Slot::Var(x) => {
            model.add_constraint(name, vec![(var, 1.0), (x, -1.0)], Relation::Le, 0.0);
        }
        Slot::Const(c) => {
            let v = &mut model.variables[var.0];
            v.upper = Some(v.upper.map_or(c, |u| u.min(c)));
        }
    }
}

/// Adds one scenario's operating variables and constraints to `model`,
/// tied to the first-stage quantities in `first`.
pub fn build_scenario_block(
    model: &mut MipModel,
    instance: &NetworkInstance,
    scenario: &Scenario,
    cycles: &CycleSet,
    first: &FirstStage,
    mode: ServiceMode,
) -> ScenarioVars {
    let s = format!("s{}", scenario.id);
    let ends = instance.endpoints();
    let m = instance.edges.len();
    let n = instance.buses.len();

    let mut vars = ScenarioVars {
        scenario: scenario.id,
        line_used: Vec::with_capacity(m),
        switch_open: Vec::with_capacity(m),
        harden_used: vec![None; m],
        facility_used: vec![None; n],
        capacity_use: vec![[None; 3]; n],
        direction_neg: Vec::with_capacity(m),
        direction_pos: Vec::with_capacity(m),
        flow: vec![[None; 3]; m],
        generation: vec![[None; 3]; n],
        served: vec![[None; 3]; n],
        block_served: Vec::with_capacity(n),
        cycle_line: vec![None; cycles.reduced_edges.len()],
        cycle_switch: vec![None; cycles.reduced_edges.len()],
        critical_row: None,
        total_row: None,
        shortfall: [None, None],
    };

    for (k, e) in instance.edges.iter().enumerate() {
        let id = &e.id;
        let lu = model.add_binary(format!("{s}.line_used.{id}"));
        let so = model.add_binary(format!("{s}.switch_open.{id}"));
        let dn = model.add_binary(format!("{s}.dir_neg.{id}"));
        let dp = model.add_binary(format!("{s}.dir_pos.{id}"));
        vars.line_used.push(lu);
        vars.switch_open.push(so);
        vars.direction_neg.push(dn);
        vars.direction_pos.push(dp);
        link(model, format!("{s}.link_line.{id}"), lu, first.line[k]);
        link(model, format!("{s}.link_switch.{id}"), so, first.switch[k]);

        for p in e.phases.iter() {
            let u = e.capacity[p.index()];
            let f = model.add_continuous(format!("{s}.flow.{id}.{p}"), Some(-u), Some(u));
            vars.flow[k][p.index()] = Some(f);
            model.add_constraint(format!("{s}.flow_cap_hi.{id}.{p}"), vec![(f, 1.0), (dp, -u)], Relation::Le, 0.0);
            model.add_constraint(format!("{s}.flow_cap_lo.{id}.{p}"), vec![(f, 1.0), (dn, u)], Relation::Ge, 0.0);
            model.add_constraint(format!("{s}.switch_block_hi.{id}.{p}"), vec![(f, 1.0), (so, u)], Relation::Le, u);
            model.add_constraint(format!("{s}.switch_block_lo.{id}.{p}"), vec![(f, 1.0), (so, -u)], Relation::Ge, -u);
        }
        model.add_constraint(
            format!("{s}.direction.{id}"),
            vec![(dn, 1.0), (dp, 1.0), (lu, -1.0)],
            Relation::Le,
            0.0,
        );
        model.add_constraint(format!("{s}.switch_needs_line.{id}"), vec![(so, 1.0), (lu, -1.0)], Relation::Le, 0.0);

        let phases: Vec<Phase> = e.phases.iter().collect();
        if phases.len() >= 2 {
            add_phase_balance(model, &s, e, &phases, &vars.flow[k], dn, dp);
        }

        if scenario.is_damaged(k) {
            // hardening use only matters where damage can occur
            let hu = model.add_binary(format!("{s}.harden_used.{id}"));
            vars.harden_used[k] = Some(hu);
            link(model, format!("{s}.link_harden.{id}"), hu, first.harden[k]);
            model.add_constraint(format!("{s}.damage.{id}"), vec![(lu, 1.0), (hu, -1.0)], Relation::Eq, 0.0);
            if scenario.is_hardened_damaged(k) {
                model.add_constraint(format!("{s}.damage_hardened.{id}"), vec![(hu, 1.0)], Relation::Le, 0.0);
            }
        }
    }

    for (i, b) in instance.buses.iter().enumerate() {
        let id = &b.id;
        let site = b.generation.as_ref();
        if let Some(g) = site.filter(|g| g.can_expand()) {
            let fu = model.add_binary(format!("{s}.facility_used.{id}"));
            vars.facility_used[i] = Some(fu);
            link(model, format!("{s}.link_facility.{id}"), fu, first.facility[i]);
            for p in b.phases.iter() {
                let max = g.max_new_capacity[p.index()];
                if max > 0.0 {
                    let cu = model.add_continuous(format!("{s}.capacity_use.{id}.{p}"), Some(0.0), Some(max));
                    vars.capacity_use[i][p.index()] = Some(cu);
                    link(model, format!("{s}.link_capacity.{id}.{p}"), cu, first.capacity[i][p.index()]);
                    model.add_constraint(
                        format!("{s}.capacity_limit.{id}.{p}"),
                        vec![(cu, 1.0), (fu, -max)],
                        Relation::Le,
                        0.0,
                    );
                }
            }
        }
        for p in b.phases.iter() {
            let existing = site.map_or(0.0, |g| g.existing_capacity[p.index()]);
            let cu = vars.capacity_use[i][p.index()];
            if existing > 0.0 || cu.is_some() {
                let g = model.add_continuous(format!("{s}.gen.{id}.{p}"), Some(0.0), None);
                vars.generation[i][p.index()] = Some(g);
                match cu {
                    Some(cu) => {
                        model.add_constraint(
                            format!("{s}.gen_limit.{id}.{p}"),
                            vec![(g, 1.0), (cu, -1.0)],
                            Relation::Le,
                            existing,
                        );
                    }
                    None => model.variables[g.0].upper = Some(existing),
                }
            }
        }

        let blocks: Vec<VarId> = (0..b.load_blocks.len())
            .map(|j| model.add_binary(format!("{s}.block.{id}.{j}")))
            .collect();
        for p in b.phases.iter() {
            let terms: Vec<(VarId, f64)> = blocks
                .iter()
                .zip(&b.load_blocks)
                .filter(|(_, lb)| lb.demand[p.index()] > 0.0)
                .map(|(v, lb)| (*v, -lb.demand[p.index()]))
                .collect();
            if terms.is_empty() {
                continue;
            }
            let sv = model.add_continuous(format!("{s}.served.{id}.{p}"), Some(0.0), None);
            vars.served[i][p.index()] = Some(sv);
            let mut row = vec![(sv, 1.0)];
            row.extend(terms);
            model.add_constraint(format!("{s}.load_served.{id}.{p}"), row, Relation::Eq, 0.0);
        }
        vars.block_served.push(blocks);
    }

    // flow leaves `from` and enters `to`
    for (i, b) in instance.buses.iter().enumerate() {
        for p in b.phases.iter() {
            let mut terms = Vec::new();
            if let Some(g) = vars.generation[i][p.index()] {
                terms.push((g, 1.0));
            }
            if let Some(sv) = vars.served[i][p.index()] {
                terms.push((sv, -1.0));
            }
            for (k, &(a, z)) in ends.iter().enumerate() {
                if let Some(f) = vars.flow[k][p.index()] {
                    if a == i {
                        terms.push((f, -1.0));
                    } else if z == i {
                        terms.push((f, 1.0));
                    }
                }
            }
            if !terms.is_empty() {
                model.add_constraint(format!("{s}.node_balance.{}.{p}", b.id), terms, Relation::Eq, 0.0);
            }
        }
    }

    add_radiality(model, &s, instance, cycles, &mut vars);
    add_service(model, &s, instance, mode, &mut vars);
    vars
}

/// Keeps every phase flow within `[1 - beta, 1 + beta]` times the phase
/// average, in whichever direction the line is operated.
fn add_phase_balance(
    model: &mut MipModel,
    s: &str,
    e: &crate::grid::Edge,
    phases: &[Phase],
    flow: &[Option<VarId>; 3],
    dn: VarId,
    dp: VarId,
) {
    let np = phases.len() as f64;
    let beta = e.beta();
    let lo = (1.0 - beta) / np;
    let hi = (1.0 + beta) / np;
    let total_cap: f64 = phases.iter().map(|p| e.capacity[p.index()]).sum();
    // row: f_k - c * sum(f); c in {lo, hi}
    let band = |k: Phase, c: f64| -> Vec<(VarId, f64)> {
        phases
            .iter()
            .map(|&q| {
                let coef = if q == k { 1.0 - c } else { -c };
                (flow[q.index()].unwrap(), coef)
            })
            .collect()
    };
    for &k in phases {
        let big_m = e.capacity[k.index()] + hi * total_cap;
        let id = &e.id;
        let mut r = band(k, lo);
        r.push((dp, -big_m));
        model.add_constraint(format!("{s}.phase_balance_lo_pos.{id}.{k}"), r, Relation::Ge, -big_m);
        let mut r = band(k, hi);
        r.push((dp, big_m));
        model.add_constraint(format!("{s}.phase_balance_hi_pos.{id}.{k}"), r, Relation::Le, big_m);
        let mut r = band(k, lo);
        r.push((dn, big_m));
        model.add_constraint(format!("{s}.phase_balance_lo_neg.{id}.{k}"), r, Relation::Le, big_m);
        let mut r = band(k, hi);
        r.push((dn, -big_m));
        model.add_constraint(format!("{s}.phase_balance_hi_neg.{id}.{k}"), r, Relation::Ge, -big_m);
    }
}

fn add_radiality(model: &mut MipModel, s: &str, instance: &NetworkInstance, cycles: &CycleSet, vars: &mut ScenarioVars) {
    let in_cycle = cycles.in_cycle();
    let bus = |i: usize| &instance.buses[i].id;
    for (r, red) in cycles.reduced_edges.iter().enumerate() {
        if !in_cycle[r] {
            continue;
        }
        let tag = format!("{}~{}", bus(red.u), bus(red.v));
        let cl = model.add_binary(format!("{s}.cycle_line.{tag}"));
        let cs = model.add_binary(format!("{s}.cycle_switch.{tag}"));
        vars.cycle_line[r] = Some(cl);
        vars.cycle_switch[r] = Some(cs);
        for &k in &red.edges {
            let id = &instance.edges[k].id;
            let (lu, so) = (vars.line_used[k], vars.switch_open[k]);
            model.add_constraint(format!("{s}.cycle_line_link.{id}"), vec![(lu, 1.0), (cl, -1.0)], Relation::Le, 0.0);
            model.add_constraint(
                format!("{s}.cycle_switch_cap.{id}"),
                vec![(so, 1.0), (lu, 1.0), (cs, 1.0)],
                Relation::Le,
                3.0,
            );
            model.add_constraint(
                format!("{s}.cycle_switch_link.{id}"),
                vec![(so, 1.0), (lu, -1.0), (cs, -1.0)],
                Relation::Ge,
                -1.0,
            );
        }
    }
    for (c, cycle) in cycles.cycles.iter().enumerate() {
        let mut terms = Vec::new();
        for &r in &cycle.edges {
            terms.push((vars.cycle_line[r].unwrap(), 1.0));
            terms.push((vars.cycle_switch[r].unwrap(), -1.0));
        }
        let rhs = cycle.vertices.len() as f64 - 1.0;
        model.add_constraint(format!("{s}.radial_cycle.{c}"), terms, Relation::Le, rhs);
    }
    for (_, red) in cycles.parallel_groups() {
        for (a, &e1) in red.edges.iter().enumerate() {
            for &e2 in &red.edges[a + 1..] {
                let name = format!("{s}.parallel_pair.{}.{}", instance.edges[e1].id, instance.edges[e2].id);
                model.add_constraint(
                    name,
                    vec![
                        (vars.line_used[e1], 1.0),
                        (vars.line_used[e2], 1.0),
                        (vars.switch_open[e1], -1.0),
                        (vars.switch_open[e2], -1.0),
                    ],
                    Relation::Le,
                    1.0,
                );
            }
        }
    }
}

fn add_service(model: &mut MipModel, s: &str, instance: &NetworkInstance, mode: ServiceMode, vars: &mut ScenarioVars) {
    let targets = [
        (true, instance.critical_fraction, "critical_service", "shortfall_critical"),
        (false, instance.total_fraction, "total_service", "shortfall_total"),
    ];
    for (slot, (critical, fraction, row_name, shortfall_name)) in targets.into_iter().enumerate() {
        let mut terms = Vec::new();
        let mut demand = 0.0;
        for (i, b) in instance.buses.iter().enumerate() {
            if b.is_critical != critical {
                continue;
            }
            demand += b.total_demand();
            for v in vars.served[i].iter().flatten() {
                terms.push((*v, 1.0));
            }
        }
        if demand <= 0.0 || fraction <= 0.0 {
            continue;
        }
        if mode == ServiceMode::Shortfall {
            // shortfall measured as a fraction of the demand
            let sf = model.add_continuous(format!("{s}.{shortfall_name}"), Some(0.0), None);
            terms.push((sf, demand));
            vars.shortfall[slot] = Some(sf);
        }
        let row = model.add_constraint(format!("{s}.{row_name}"), terms, Relation::Ge, fraction * demand);
        if critical {
            vars.critical_row = Some(row);
        } else {
            vars.total_row = Some(row);
        }
    }
}
