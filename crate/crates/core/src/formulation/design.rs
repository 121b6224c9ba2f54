use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::grid::{NetworkInstance, PerPhase, Phase};

/// Values below this are treated as zero when reading capacities back
/// from a solver.
pub const CAPACITY_EPS: f64 = 1e-9;

/// First-stage decisions. Existing lines and switches are always `true`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub line_built: Vec<bool>,
    pub switch_built: Vec<bool>,
    pub hardened: Vec<bool>,
    /// One entry per bus.
    pub facility_built: Vec<bool>,
    /// One entry per bus.
    pub new_capacity: Vec<PerPhase>,
}

impl Design {
    /// The do-nothing design: existing lines and switches only.
    pub fn existing(instance: &NetworkInstance) -> Self {
        Self {
            line_built: instance.edges.iter().map(|e| e.exists).collect(),
            switch_built: instance.edges.iter().map(|e| e.has_existing_switch).collect(),
            hardened: vec![false; instance.edges.len()],
            facility_built: vec![false; instance.buses.len()],
            new_capacity: vec![[0.0; 3]; instance.buses.len()],
        }
    }

    /// Every possible upgrade at full size.
    pub fn everything(instance: &NetworkInstance) -> Self {
        let mut d = Self::existing(instance);
        d.line_built.fill(true);
        d.switch_built.fill(true);
        for (k, e) in instance.edges.iter().enumerate() {
            d.hardened[k] = e.hardenable;
        }
        for (i, b) in instance.buses.iter().enumerate() {
            if let Some(g) = b.generation.as_ref().filter(|g| g.can_expand()) {
                d.facility_built[i] = true;
                d.new_capacity[i] = g.max_new_capacity;
            }
        }
        d
    }

    /// Investment cost. Existing components cost nothing.
    pub fn cost(&self, instance: &NetworkInstance) -> f64 {
        let mut total = 0.0;
        for (k, e) in instance.edges.iter().enumerate() {
            if self.line_built[k] && !e.exists {
                total += e.build_cost;
            }
            if self.switch_built[k] && !e.has_existing_switch {
                total += e.switch_cost;
            }
            if self.hardened[k] {
                total += e.harden_cost;
            }
        }
        for (i, b) in instance.buses.iter().enumerate() {
            if let Some(g) = &b.generation {
                if self.facility_built[i] {
                    total += g.facility_cost;
                }
                for p in Phase::ALL {
                    total += g.capacity_cost[p.index()] * self.new_capacity[i][p.index()];
                }
            }
        }
        total
    }

    /// Componentwise maximum of two designs.
    pub fn union(&self, other: &Design) -> Design {
        let or = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(x, y)| *x || *y).collect();
        Design {
            line_built: or(&self.line_built, &other.line_built),
            switch_built: or(&self.switch_built, &other.switch_built),
            hardened: or(&self.hardened, &other.hardened),
            facility_built: or(&self.facility_built, &other.facility_built),
            new_capacity: self
                .new_capacity
                .iter()
                .zip(&other.new_capacity)
                .map(|(a, b)| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])])
                .collect(),
        }
    }

    /// Checks that the design only uses upgrades the instance offers.
    pub fn validate(&self, instance: &NetworkInstance) -> Result<(), GridError> {
        let bad = |msg: String| Err(GridError::InvalidDesign(msg));
        let (m, n) = (instance.edges.len(), instance.buses.len());
        if self.line_built.len() != m || self.switch_built.len() != m || self.hardened.len() != m {
            return bad(format!("edge vectors must have length {m}"));
        }
        if self.facility_built.len() != n || self.new_capacity.len() != n {
            return bad(format!("bus vectors must have length {n}"));
        }
        for (k, e) in instance.edges.iter().enumerate() {
            if e.exists && !self.line_built[k] {
                return bad(format!("existing line {} cannot be unbuilt", e.id));
            }
            if e.has_existing_switch && !self.switch_built[k] {
                return bad(format!("existing switch on {} cannot be removed", e.id));
            }
            if self.switch_built[k] && !self.line_built[k] {
                return bad(format!("switch on {} requires the line", e.id));
            }
            if self.hardened[k] && !e.hardenable {
                return bad(format!("line {} is not hardenable", e.id));
            }
        }
        for (i, b) in instance.buses.iter().enumerate() {
            let max = b.generation.as_ref().map_or([0.0; 3], |g| g.max_new_capacity);
            let expandable = b.generation.as_ref().is_some_and(|g| g.can_expand());
            if self.facility_built[i] && !expandable {
                return bad(format!("bus {} has no generation site to build", b.id));
            }
            for p in Phase::ALL {
                let c = self.new_capacity[i][p.index()];
                if !(c >= 0.0) {
                    return bad(format!("negative capacity at {}", b.id));
                }
                let cap = if self.facility_built[i] { max[p.index()] } else { 0.0 };
                if c > cap + CAPACITY_EPS {
                    return bad(format!("capacity at {} phase {p} exceeds what the facility allows", b.id));
                }
            }
        }
        Ok(())
    }
}
